#include "livseg/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

#include "livseg/uncertainty.hpp"

namespace livseg {

namespace {

const boost::math::normal kStdNormal{0.0, 1.0};

/// c[0] + c[1] x + c[2] x^2 + ...
template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double r = 0.0;
  for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
  return r;
}

/// Upper-tail normal probability.
double normal_sf(double z) { return boost::math::cdf(boost::math::complement(kStdNormal, z)); }
double normal_cdf(double z) { return boost::math::cdf(kStdNormal, z); }

/// Antisymmetric Shapiro-Wilk coefficients for the upper half, a[0] largest.
std::vector<double> shapiro_coefficients(std::size_t n) {
  constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }
  const double an = double(n);
  const double an25 = an + 0.25;
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = boost::math::quantile(kStdNormal, (double(i + 1) - 0.375) / an25);
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(c1, rsn) - m[0] / ssumm2;
  std::size_t first_scaled;
  double fac;
  if (n > 5) {
    const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
    first_scaled = 2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    first_scaled = 1;
  }
  a[0] = a1;
  for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

std::vector<double> nonzero(std::span<const double> d, std::size_t& zeros) {
  std::vector<double> out;
  zeros = 0;
  for (double x : d) {
    if (x == 0.0) {
      ++zeros;
    } else {
      out.push_back(x);
    }
  }
  return out;
}

struct SignedRanks {
  std::vector<double> ranks;  // average ranks of |d|
  std::vector<bool> positive;
  double w_plus = 0.0;
};

SignedRanks signed_ranks(const std::vector<double>& d) {
  std::vector<double> mags(d.size());
  std::transform(d.begin(), d.end(), mags.begin(), [](double x) { return std::abs(x); });
  SignedRanks r;
  r.ranks = average_ranks(mags);
  r.positive.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    r.positive[i] = d[i] > 0.0;
    if (r.positive[i]) r.w_plus += r.ranks[i];
  }
  return r;
}

/// Exact null distribution of 2*W+ by dynamic programming over doubled ranks,
/// which are integers even with average-rank ties.
double exact_p(const SignedRanks& r, Alternative alt) {
  std::vector<std::uint64_t> counts{1};
  for (double rank : r.ranks) {
    const auto step = static_cast<std::size_t>(std::llround(2.0 * rank));
    std::vector<std::uint64_t> next(counts.size() + step, 0);
    for (std::size_t s = 0; s < counts.size(); ++s) {
      next[s] += counts[s];
      next[s + step] += counts[s];
    }
    counts = std::move(next);
  }
  const auto observed = static_cast<std::size_t>(std::llround(2.0 * r.w_plus));
  std::uint64_t tail = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (alt == Alternative::greater ? s >= observed : s <= observed) tail += counts[s];
  }
  return double(tail) / std::ldexp(1.0, int(r.ranks.size()));
}

double normal_p(const SignedRanks& r, Alternative alt) {
  const double n = double(r.ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted = r.ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = double(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  const double sd = std::sqrt(var);
  if (alt == Alternative::greater) return normal_sf((r.w_plus - mean - 0.5) / sd);
  return normal_cdf((r.w_plus - mean + 0.5) / sd);
}

}  // namespace

ShapiroResult shapiro_wilk(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 3 || n > 5000) throw std::invalid_argument("shapiro_wilk: sample size must be in [3, 5000]");
  std::vector<double> x(xs.begin(), xs.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 0.0)) {
    throw std::invalid_argument("shapiro_wilk: sample has zero range");
  }

  const std::vector<double> a = shapiro_coefficients(n);
  // Full antisymmetric coefficient vector against range-scaled data; the
  // coefficients have unit norm and zero mean.
  double sx = 0.0;
  for (double v : x) sx += v / range;
  sx /= double(n);
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t mirror = n - 1 - i;
    double ai = 0.0;
    if (i < n / 2) {
      ai = -a[i];
    } else if (mirror < n / 2) {
      ai = a[mirror];
    }
    const double xsx = x[i] / range - sx;
    ssa += ai * ai;
    ssx += xsx * xsx;
    sax += ai * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  ShapiroResult res{w, 1.0};
  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;   // 6/pi
    constexpr double stqr = 1.04719755119660;  // pi/3
    res.p = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
    return res;
  }

  constexpr double g[] = {-2.273, 0.459};
  constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

  w1 = std::log(w1);
  const double an = double(n);
  double mean, sd;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (w1 >= gamma) {
      res.p = 1e-99;
      return res;
    }
    w1 = -std::log(gamma - w1);
    mean = poly(c3, an);
    sd = std::exp(poly(c4, an));
  } else {
    const double xx = std::log(an);
    mean = poly(c5, xx);
    sd = std::exp(poly(c6, xx));
  }
  res.p = normal_sf((w1 - mean) / sd);
  return res;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> d, Alternative alt, std::size_t exact_max_n) {
  WilcoxonResult res;
  const std::vector<double> nz = nonzero(d, res.zeros_dropped);
  if (nz.empty()) throw std::invalid_argument("wilcoxon: all differences are zero");
  const SignedRanks r = signed_ranks(nz);
  res.n_used = nz.size();
  res.w_plus = r.w_plus;
  res.exact = nz.size() <= exact_max_n;
  res.p = res.exact ? exact_p(r, alt) : normal_p(r, alt);
  return res;
}

double wilcoxon_normal_p(std::span<const double> d, Alternative alt) {
  std::size_t zeros = 0;
  const std::vector<double> nz = nonzero(d, zeros);
  if (nz.empty()) throw std::invalid_argument("wilcoxon: all differences are zero");
  return normal_p(signed_ranks(nz), alt);
}

double paired_t_test_one_sided(std::span<const double> d, Alternative alt) {
  const std::size_t n = d.size();
  if (n < 2) throw std::invalid_argument("t-test: need at least two differences");
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / double(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / double(n - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("t-test: zero variance");
  const double t = mean / (sd / std::sqrt(double(n)));
  const boost::math::students_t dist(double(n - 1));
  if (alt == Alternative::greater) return boost::math::cdf(boost::math::complement(dist, t));
  return boost::math::cdf(dist, t);
}

std::string_view to_string(Hypothesis h) { return h == Hypothesis::a_less_than_b ? "A<B" : "A>B"; }

Hypothesis parse_hypothesis(std::string_view text) {
  if (text == "A<B" || text == "less") return Hypothesis::a_less_than_b;
  if (text == "A>B" || text == "greater") return Hypothesis::a_greater_than_b;
  throw std::invalid_argument("unknown hypothesis: " + std::string(text));
}

std::string_view to_string(TestKind t) { return t == TestKind::t_test ? "T-test" : "Wilcoxon"; }

SignificanceResult run_significance_protocol(const PairedSample& sample, double alpha) {
  if (sample.a.size() != sample.b.size()) throw std::invalid_argument("paired samples differ in length");
  if (sample.a.size() < 3) throw std::invalid_argument("paired samples need at least 3 cases");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");

  SignificanceResult res;
  res.metric = sample.metric;
  res.hypothesis = sample.hypothesis;
  res.n = sample.a.size();
  res.alpha = alpha;

  std::vector<double> d(res.n);
  for (std::size_t i = 0; i < res.n; ++i) d[i] = sample.a[i] - sample.b[i];
  const Alternative alt =
      sample.hypothesis == Hypothesis::a_greater_than_b ? Alternative::greater : Alternative::less;

  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) {
    res.degenerate = true;
    res.zeros_dropped = res.n;
    res.p = 1.0;
    return res;
  }
  try {
    const ShapiroResult sw = shapiro_wilk(d);
    res.shapiro_w = sw.w;
    res.shapiro_p = sw.p;
  } catch (const std::invalid_argument&) {
    // zero range: no normality evidence, rank test below
  }
  if (res.shapiro_p && *res.shapiro_p >= alpha) {
    res.test = TestKind::t_test;
    res.p = paired_t_test_one_sided(d, alt);
  } else {
    res.test = TestKind::wilcoxon;
    const WilcoxonResult w = wilcoxon_signed_rank(d, alt);
    res.p = w.p;
    res.zeros_dropped = w.zeros_dropped;
  }
  res.significant = res.p < alpha;
  return res;
}

}  // namespace livseg
