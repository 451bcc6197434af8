#include <doctest.h>

#include <wsnqd/error.hpp>
#include <wsnqd/metrics.hpp>
#include <wsnqd/montecarlo.hpp>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace wsnqd;

namespace {

DetectionPartition manual_partition(std::vector<SensorSet> sets, std::size_t n) {
  DetectionPartition p;
  p.n_sensors = n;
  for (std::size_t i = 0; i < sets.size(); ++i) p.regions.push_back(Region{i, sets[i], {}, {}, 0.0});
  return p;
}

std::uint64_t mask_of(const SensorSet& s) {
  std::uint64_t m = 0;
  for (auto v : s) m |= std::uint64_t{1} << v;
  return m;
}

struct Hex {
  presets::Preset pre = presets::hex7(SensingKind::Boolean);
  RangeParams ranges = compute_ranges(pre.deployment, pre.mu1, pre.omega0_lower);
  DetectionPartition part = build_partition(pre.deployment, ranges, 0.02);
};

// Minimal-family constant by enumerating every index family and keeping the
// one made of exactly the inclusion-minimal sets.
std::size_t brute_m_arl(const DetectionPartition& p) {
  const std::size_t n = p.size();
  std::vector<std::uint64_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = mask_of(p.region(i).sensors);
  auto has_strict_subset = [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && (m[j] & ~m[i]) == 0) return true;
    return false;
  };
  for (std::uint64_t fam = 1; fam < (std::uint64_t{1} << n); ++fam) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const bool in = fam >> i & 1;
      ok = in != has_strict_subset(i);
    }
    if (!ok) continue;
    std::size_t best = SIZE_MAX;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(fam >> i & 1)) continue;
      std::uint64_t others = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && (fam >> j & 1)) others |= m[j];
      best = std::min<std::size_t>(best, std::popcount(m[i] & ~others));
    }
    return best;
  }
  return SIZE_MAX;
}

}  // namespace

TEST_CASE("KL examples") {
  CHECK(kl_gaussian(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(kl_gaussian(0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(kl_gaussian(1.0, 0.0), DomainError);
}

TEST_CASE("KL matches quadrature") {
  for (auto [mu, s] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.7}, {0.25, 1.0}}) {
    auto f = [&](double x, double m) {
      return std::exp(-(x - m) * (x - m) / (2 * s * s)) / (s * std::sqrt(2 * std::numbers::pi));
    };
    // Composite Simpson over +-12 sigma around the alternative mean.
    const int n = 20000;
    const double a = mu - 12 * s, b = mu + 12 * s, h = (b - a) / n;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double x = a + k * h;
      const double g = f(x, mu) * std::log(f(x, mu) / f(x, 0.0));
      acc += g * (k == 0 || k == n ? 1 : k % 2 ? 4 : 2);
    }
    CHECK(std::abs(acc * h / 3 - kl_gaussian(mu, s)) <= 1e-6);
  }
}

TEST_CASE("KL between hypotheses") {
  auto p = manual_partition({{0, 2, 3}, {0, 1, 3}}, 7);
  CHECK(kl_between_hypotheses(p, 0, 0, 0.5) == 0.0);
  CHECK(kl_between_hypotheses(p, 0, 1, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("minimal set constant examples") {
  auto disjoint = minimal_set_constant(manual_partition({{0}, {1}}, 2));
  CHECK(disjoint.m_arl == 1);
  CHECK(disjoint.minimal_family == std::vector<std::size_t>{0, 1});

  auto nested = minimal_set_constant(manual_partition({{0}, {0, 1}}, 2));
  CHECK(nested.m_arl == 1);
  CHECK(nested.minimal_family == std::vector<std::size_t>{0});
}

TEST_CASE("minimal set constant equals enumeration") {
  Hex h;
  CHECK(minimal_set_constant(h.part).m_arl == brute_m_arl(h.part));
  CHECK(minimal_set_constant(h.part).minimal_family.size() == 6);

  std::mt19937_64 g(4);
  for (int t = 0; t < 300; ++t) {
    std::set<SensorSet> sets;
    const std::size_t want = 1 + g() % 10;
    while (sets.size() < want) {
      SensorSet s;
      for (std::size_t v = 0; v < 6; ++v)
        if (g() % 3 == 0) s.push_back(v);
      if (!s.empty()) sets.insert(s);
    }
    auto p = manual_partition(std::vector<SensorSet>(sets.begin(), sets.end()), 6);
    CHECK(minimal_set_constant(p).m_arl == brute_m_arl(p));
  }
}

TEST_CASE("PFI constants") {
  Hex h;
  const auto& dep = h.pre.deployment;
  CHECK_FALSE(pfi_constants(manual_partition({{0}}, 1), dep, h.ranges));

  auto sym = pfi_constants(manual_partition({{0, 1}, {1, 2}}, 3), dep, h.ranges);
  REQUIRE(sym);
  CHECK(sym->m_pfi == 1);
  CHECK(sym->m_bar_pfi == 1);

  // All ordered pairs, set differences by bit masks.
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& a : h.part.regions)
    for (const auto& b : h.part.regions) {
      const auto d = std::popcount(mask_of(b.sensors) & ~mask_of(a.sensors));
      if (d == 0) continue;
      lo = std::min<std::size_t>(lo, d);
      hi = std::max<std::size_t>(hi, d);
    }
  auto k = pfi_constants(h.part, dep, h.ranges);
  REQUIRE(k);
  CHECK(k->m_pfi == lo);
  CHECK(k->m_bar_pfi == hi);
}

TEST_CASE("bound constants for the Boolean preset") {
  Hex h;
  auto k = bound_constants(h.part, h.pre.deployment, h.ranges, 0.01);
  CHECK(k.xi == 2.0);
  CHECK(k.omega0_lower == 1.0);
  CHECK(k.kl == doctest::Approx(0.5));
  CHECK(k.a_max == doctest::Approx(0.99));
  CHECK(k.a_hall == k.a_max);
  CHECK(k.a_all == doctest::Approx(static_cast<double>(k.m_arl) - 0.01));
  CHECK(k.n_lower == 3);
  REQUIRE(k.m_pfi);
  CHECK(k.b_all == doctest::Approx(*k.m_pfi - 1.0 / 7));
  CHECK(k.b_max == doctest::Approx(*k.m_pfi - (1.0 + *k.m_bar_pfi) / 7));

  auto v = pfi_upper_bound(LocalRule::All, 5.0, k);
  CHECK(v.value == doctest::Approx(std::exp(-(1.0 - 1.0 / 7) * 5) / (3 * 0.5)));
  CHECK_FALSE(v.vacuous);
}

TEST_CASE("ARL2FA bound examples") {
  Hex h;
  auto k = bound_constants(h.part, h.pre.deployment, h.ranges, 0.01);
  CHECK(arl2fa_lower_bound(LocalRule::Max, 9.52, k).value == doctest::Approx(std::exp(0.99 * 9.52)));
  CHECK(arl2fa_lower_bound(LocalRule::Max, 9.52, k).value == doctest::Approx(1.23e4).epsilon(0.01));
  CHECK(arl2fa_lower_bound(LocalRule::Hall, 0.0, k).value == 1.0);
  k.a_all = 3 - 0.01;
  CHECK(arl2fa_lower_bound(LocalRule::All, 2.0, k).value == doctest::Approx(std::exp(2.99 * 2)));
}

TEST_CASE("PFI bound decreases in c") {
  Hex h;
  auto k = bound_constants(h.part, h.pre.deployment, h.ranges, 0.01);
  for (auto rule : {LocalRule::Max, LocalRule::Hall, LocalRule::All}) {
    if (k.b(rule) <= 0) continue;
    double prev = pfi_upper_bound(rule, 0.5, k).value;
    for (double c = 1.0; c < 40.0; c += 0.5) {
      const double v = pfi_upper_bound(rule, c, k).value;
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("SADD and threshold helpers") {
  CHECK(sadd_upper_bound(2.96, 0.5) == doctest::Approx(5.92));
  CHECK(sadd_upper_bound(0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(sadd_upper_bound(1.0, 0.0), DomainError);

  BoundConstants k;
  k.a_max = 0.99;
  k.b_max = 10.0;
  k.pfi_applicable = true;
  CHECK(threshold_for_targets(1e5, 0.5, k, LocalRule::Max) == doctest::Approx(11.63).epsilon(1e-3));
  k.b_max = -0.1;
  CHECK_THROWS_AS(threshold_for_targets(1e5, 0.05, k, LocalRule::Max), DomainError);
}

TEST_CASE("centralized SADD bound") {
  auto p = manual_partition({{0, 2, 3}, {0, 1, 3}, {0, 1, 2, 3}}, 4);
  const double v = centralized_sadd_bound(p, 1e4, 0.05, 0.5);
  CHECK(v == doctest::Approx(std::max(std::log(1e4) / 1.5, -std::log(0.05) / 0.5)));
}

TEST_CASE("drift and escape-time examples") {
  auto pre = presets::hex7(SensingKind::PowerLaw);
  auto r = compute_ranges(pre.deployment, pre.mu1, pre.omega0_lower);
  CHECK(mean_drift(pre.deployment, r, r.r_d) == doctest::Approx(0.5));
  CHECK(mean_drift(pre.deployment, r, 2.0) == doctest::Approx(-0.25));
  CHECK(escape_time_lower_bound(pre.deployment, r, 10.0, 2.0) == doctest::Approx(std::exp(5.0)));
  CHECK_THROWS_AS(escape_time_lower_bound(pre.deployment, r, 10.0, 1.2), DomainError);
}

TEST_CASE("drift matches the sample mean of the LLR") {
  auto pre = presets::hex7(SensingKind::PowerLaw);
  auto r = compute_ranges(pre.deployment, pre.mu1, pre.omega0_lower);
  const LlrMap llr = llr_for(pre.deployment, r);
  NoiseStream ns(1, 2, 3);
  const double d = 1.3, mean = pre.deployment.h_e * rho(pre.deployment.model, d);
  double acc = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) acc += llr(mean + ns.normal());
  CHECK(acc / n == doctest::Approx(mean_drift(pre.deployment, r, d)).epsilon(0.02).scale(1.0));
}
