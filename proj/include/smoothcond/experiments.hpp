#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "smoothcond/bounds.hpp"
#include "smoothcond/error.hpp"
#include "smoothcond/matrix.hpp"
#include "smoothcond/parallel.hpp"
#include "smoothcond/pinv.hpp"
#include "smoothcond/random.hpp"
#include "smoothcond/report.hpp"
#include "smoothcond/sampling.hpp"
#include "smoothcond/stats.hpp"
#include "smoothcond/svd.hpp"

namespace smoothcond::experiments {

// ------------------------------------------------------------------- trials

struct TrialRecord {
  std::size_t trial_index = 0;
  double kappa = 0.0;
  double ln_kappa = 0.0;
  double spectral_norm = 0.0;
  double pinv_norm = 0.0;
  Seed seed;
  bool rank_deficient = false;
};

// kappa and the two norms from one singular-value pass. A rank-deficient
// matrix gets kappa = pinv_norm = +inf and is flagged.
inline TrialRecord measure(const Matrix& a) {
  const Vector s = singular_values(a);
  TrialRecord r;
  r.spectral_norm = s.front();
  const double smin = s.back();
  if (!(smin > rank_tol(a.rows(), a.cols()) * s.front())) {
    r.rank_deficient = true;
    r.kappa = r.pinv_norm = r.ln_kappa = std::numeric_limits<double>::infinity();
    return r;
  }
  r.pinv_norm = 1.0 / smin;
  r.kappa = s.front() / smin;
  r.ln_kappa = std::log(r.kappa);
  return r;
}

// Trial i samples from seed.child(i); results are stored by index.
inline std::vector<TrialRecord> run_trials(const GaussianEnsemble& e, std::size_t trials, Seed seed,
                                           std::size_t threads = default_thread_count()) {
  std::vector<TrialRecord> out(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    const Seed s = seed.child(i);
    TrialRecord r = measure(sample_gaussian_matrix(e, s));
    r.trial_index = i;
    r.seed = s;
    out[i] = r;
  });
  return out;
}

inline std::size_t count_rank_deficient(const std::vector<TrialRecord>& rs) {
  return static_cast<std::size_t>(
      std::count_if(rs.begin(), rs.end(), [](const TrialRecord& r) { return r.rank_deficient; }));
}

// CSV trial dump: trial,m,n,sigma,kappa,ln_kappa,spec_norm,pinv_norm
inline constexpr const char* kTrialCsvHeader = "trial,m,n,sigma,kappa,ln_kappa,spec_norm,pinv_norm\n";

inline void append_trial_csv(std::ostream& out, const std::vector<TrialRecord>& rs, std::size_t m,
                             std::size_t n, double sigma) {
  for (const auto& r : rs) {
    out << r.trial_index << ',' << m << ',' << n << ',' << format_double(sigma) << ','
        << format_double(r.kappa) << ',' << format_double(r.ln_kappa) << ','
        << format_double(r.spectral_norm) << ',' << format_double(r.pinv_norm) << '\n';
  }
}

// ------------------------------------------------------------------- centers

enum class CenterScale { unit_norm, sqrt_m };

// ones(m, n) / ||ones(m, n)||, optionally times sqrt(m). ||ones(m, n)|| = sqrt(mn).
inline Matrix make_ones_center(std::size_t m, std::size_t n, CenterScale scale) {
  double v = 1.0 / std::sqrt(static_cast<double>(m) * static_cast<double>(n));
  if (scale == CenterScale::sqrt_m) v *= std::sqrt(static_cast<double>(m));
  return Matrix::filled(m, n, v);
}

// ------------------------------------------------------------------ Q(m, n)

enum class QMethod { dense, bidiagonal };

inline const char* to_string(QMethod q) { return q == QMethod::dense ? "dense" : "bidiagonal"; }

struct QEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
  bool within_analytic_bounds = true;  // inside the analytic interval widened by 3 SE
};

// Q(m, n) = E||X|| / sqrt(n) for standard Gaussian X, by direct sampling of X
// or of its bidiagonal chi model.
inline QEstimate estimate_Q(std::size_t m, std::size_t n, std::size_t trials, Seed seed,
                            QMethod method = QMethod::dense, std::size_t threads = default_thread_count()) {
  if (trials < 100) throw DomainError("estimate_Q needs at least 100 trials");
  if (m < 1 || m > n) throw DomainError("estimate_Q needs 1 <= m <= n");
  const double rn = std::sqrt(static_cast<double>(n));
  std::vector<double> xs(trials);
  const GaussianEnsemble e = GaussianEnsemble::standard(m, n);
  parallel_for(trials, threads, [&](std::size_t i) {
    const Seed s = seed.child(i);
    xs[i] = method == QMethod::dense ? spectral_norm(sample_gaussian_matrix(e, s)) / rn
                                     : spectral_norm(sample_bidiagonal_model(m, n, s)) / rn;
  });
  const auto me = stats::mean_and_se(xs);
  QEstimate q{me.mean, me.standard_error, trials, true};
  if (n > 1) {
    const auto b = bounds::q_analytic_bounds(m, n);
    q.within_analytic_bounds = q.estimate >= b.lower - 3.0 * q.standard_error &&
                               q.estimate <= b.upper + 3.0 * q.standard_error;
  }
  return q;
}

// -------------------------------------------------------------------- tails

struct TailPoint {
  double threshold = 0.0;
  std::size_t exceed = 0;
  double probability = 0.0;
  stats::Interval ci95;
};

struct TailEstimate {
  std::vector<TailPoint> points;
  std::size_t trials = 0;
  std::size_t rank_deficient = 0;
};

// Fraction of trials with kappa >= T for each threshold (rank-deficient draws
// exceed every threshold).
inline TailEstimate tail_from_records(const std::vector<TrialRecord>& rs, const std::vector<double>& thresholds) {
  TailEstimate t;
  t.trials = rs.size();
  t.rank_deficient = count_rank_deficient(rs);
  for (double th : thresholds) {
    TailPoint p;
    p.threshold = th;
    for (const auto& r : rs) p.exceed += (r.kappa >= th) ? 1 : 0;
    p.probability = static_cast<double>(p.exceed) / static_cast<double>(rs.size());
    p.ci95 = stats::wilson_interval(p.exceed, rs.size());
    t.points.push_back(p);
  }
  return t;
}

inline TailEstimate empirical_tail(const GaussianEnsemble& e, const std::vector<double>& thresholds,
                                   std::size_t trials, Seed seed, std::size_t threads = default_thread_count()) {
  if (trials < 1000) throw DomainError("empirical_tail needs at least 1000 trials");
  return tail_from_records(run_trials(e, trials, seed, threads), thresholds);
}

// -------------------------------------------------------------- expectations

enum class Statistic { kappa, ln_kappa };

inline const char* to_string(Statistic s) { return s == Statistic::kappa ? "kappa" : "ln_kappa"; }

struct ExpectationEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
  std::size_t rank_deficient = 0;
  bool defined = true;             // false when a rank-deficient draw makes the mean infinite
  bool heavy_tail_warning = false; // largest kappa carries > 20% of the sum
};

inline ExpectationEstimate expectation_from_records(const std::vector<TrialRecord>& rs, Statistic stat) {
  ExpectationEstimate out;
  out.trials = rs.size();
  out.rank_deficient = count_rank_deficient(rs);
  if (out.rank_deficient > 0) {
    out.defined = false;
    out.mean = std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<double> xs(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) xs[i] = stat == Statistic::kappa ? rs[i].kappa : rs[i].ln_kappa;
  const auto me = stats::mean_and_se(xs);
  out.mean = me.mean;
  out.standard_error = me.standard_error;
  if (stat == Statistic::kappa && me.mean > 0.0) {
    const double top = *std::max_element(xs.begin(), xs.end());
    out.heavy_tail_warning = top > 0.2 * me.mean * static_cast<double>(xs.size());
  }
  return out;
}

inline ExpectationEstimate empirical_expectation(const GaussianEnsemble& e, std::size_t trials, Seed seed,
                                                 Statistic stat, std::size_t threads = default_thread_count()) {
  if (trials < 100) throw DomainError("empirical_expectation needs at least 100 trials");
  return expectation_from_records(run_trials(e, trials, seed, threads), stat);
}

// ------------------------------------------------------------------- tables

// The four published aspect ratios n = 1.5m, 2m, 2.5m, 3m.
enum class TableRatio { r1_5, r2, r2_5, r3 };

inline TableRatio table_ratio_from_string(const std::string& s) {
  if (s == "1.5") return TableRatio::r1_5;
  if (s == "2") return TableRatio::r2;
  if (s == "2.5") return TableRatio::r2_5;
  if (s == "3") return TableRatio::r3;
  throw DomainError("table ratio must be one of 1.5, 2, 2.5, 3 (got '" + s + "')");
}

inline const char* to_string(TableRatio r) {
  switch (r) {
    case TableRatio::r1_5: return "1.5";
    case TableRatio::r2: return "2";
    case TableRatio::r2_5: return "2.5";
    case TableRatio::r3: return "3";
  }
  return "?";
}

struct PublishedRow {
  std::size_t m;
  std::size_t n;
  double avr_ln_kappa;
  double mu;
};

struct PublishedTable {
  std::vector<PublishedRow> rows;
  double bound_column;  // ln(20.1 / (1 - lambda)) as printed
};

// Published simulation data (500 draws per row, ones center, sigma = 1/sqrt(m)).
inline const PublishedTable& published_table(TableRatio r) {
  static const PublishedTable t15{{{10, 15, 1.88278226808667, 7.73190477060415},
                                   {20, 30, 2.04718612539162, 8.74083698937094},
                                   {40, 60, 2.13539482051851, 9.75820027818245},
                                   {80, 120, 2.19377719811291, 10.78180469776403},
                                   {160, 240, 2.23119383890675, 11.80997066079053}},
                                  4.0993321};
  static const PublishedTable t2{{{5, 10, 1.28204418194521, 6.35902343647518},
                                  {10, 20, 1.48669849397793, 7.36178009761038},
                                  {20, 40, 1.59394635398509, 8.37451330180407},
                                  {40, 80, 1.64896402420115, 9.39470162365532},
                                  {80, 160, 1.69565973841311, 10.42037692088400},
                                  {160, 320, 1.72154032592663, 11.45004561375610}},
                                 3.693866};
  static const PublishedTable t25{{{10, 25, 1.24167342192086, 7.46370799208199},
                                   {20, 50, 1.34213347902230, 8.47908853717777},
                                   {40, 100, 1.40120155287858, 9.50123344342563},
                                   {80, 200, 1.44120596017225, 10.52833707967242},
                                   {160, 400, 1.45928497502137, 11.55903912197539}},
                                  3.511545};
  static const PublishedTable t3{{{5, 15, 0.98741849882614, 6.37209092337754},
                                  {10, 30, 1.10550395287499, 7.38102314214432},
                                  {20, 60, 1.18790345922560, 8.39838643095583},
                                  {40, 120, 1.23914387557043, 9.42199085053742},
                                  {80, 240, 1.27096561714092, 10.45015681356392},
                                  {160, 480, 1.28600775609989, 12.14829242876138}},
                                 3.406185};
  switch (r) {
    case TableRatio::r1_5: return t15;
    case TableRatio::r2: return t2;
    case TableRatio::r2_5: return t25;
    case TableRatio::r3: return t3;
  }
  return t2;
}

struct TableRow {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  double avr_ln_kappa = 0.0;
  double standard_error = 0.0;
  double bound_ln = 0.0;  // ln(20.1 / (1 - lambda))
  double published_avr_ln_kappa = 0.0;
  double published_mu = 0.0;
  double delta = 0.0;  // ours - published
  std::size_t rank_deficient = 0;
  std::vector<TrialRecord> records;
};

// Rows with m <= max_m of one published table, recomputed with `trials` draws
// from N(ones/||ones||, (1/m) I). Row r uses the sub-stream seed.child(r).
inline std::vector<TableRow> reproduce_table(TableRatio ratio, std::size_t trials, Seed seed,
                                             bounds::LambdaMode mode = bounds::LambdaMode::asymptotic,
                                             std::size_t max_m = std::numeric_limits<std::size_t>::max(),
                                             std::size_t threads = default_thread_count()) {
  const PublishedTable& pub = published_table(ratio);
  std::vector<TableRow> out;
  for (std::size_t r = 0; r < pub.rows.size(); ++r) {
    const PublishedRow& p = pub.rows[r];
    if (p.m > max_m) continue;
    const double sigma = 1.0 / std::sqrt(static_cast<double>(p.m));
    const GaussianEnsemble e(make_ones_center(p.m, p.n, CenterScale::unit_norm), sigma);
    TableRow row;
    row.m = p.m;
    row.n = p.n;
    row.trials = trials;
    row.records = run_trials(e, trials, seed.child(r), threads);
    const auto ex = expectation_from_records(row.records, Statistic::ln_kappa);
    row.avr_ln_kappa = ex.mean;
    row.standard_error = ex.standard_error;
    row.rank_deficient = ex.rank_deficient;
    row.bound_ln = bounds::expectation_bound(bounds::elongation(p.m, p.n, mode)).log_value;
    row.published_avr_ln_kappa = p.avr_ln_kappa;
    row.published_mu = p.mu;
    row.delta = row.avr_ln_kappa - p.avr_ln_kappa;
    out.push_back(std::move(row));
  }
  return out;
}

// ----------------------------------------------------- inequality checks

namespace detail {

inline std::string fmt(double x) { return format_double(x); }

inline Verdict upper_bound_verdict(std::string name, std::size_t exceed, std::size_t trials, double bound) {
  const double p = static_cast<double>(exceed) / static_cast<double>(trials);
  const auto ci = stats::wilson_interval(exceed, trials, stats::kSlackSigmas);
  Verdict v{std::move(name), p, "<=", bound, stats::compatible_with_upper_bound(exceed, trials, bound), ""};
  v.detail = std::to_string(exceed) + "/" + std::to_string(trials) + " exceed; 3-sigma Wilson [" + fmt(ci.lower) +
             ", " + fmt(ci.upper) + "]";
  return v;
}

inline Verdict lower_bound_verdict(std::string name, std::size_t hits, std::size_t trials, double bound) {
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  const auto ci = stats::wilson_interval(hits, trials, stats::kSlackSigmas);
  Verdict v{std::move(name), p, ">=", bound, stats::compatible_with_lower_bound(hits, trials, bound), ""};
  v.detail = std::to_string(hits) + "/" + std::to_string(trials) + " hits; 3-sigma Wilson [" + fmt(ci.lower) +
             ", " + fmt(ci.upper) + "]";
  return v;
}

inline std::string shape(std::size_t m, std::size_t n) { return std::to_string(m) + "x" + std::to_string(n); }

}  // namespace detail

// Tail theorem check: for z on a log-spaced grid from zeta to z_max_factor *
// zeta, empirical P{kappa >= e z / (1 - lambda)} against the bound. Q is
// estimated by dense sampling from its own sub-stream.
struct TheoremCheck {
  double q_value = 0.0;
  double zeta = 0.0;
  std::vector<double> z_grid;
  std::vector<Verdict> verdicts;
  std::vector<TrialRecord> records;
};

inline TheoremCheck check_theorem_tail(const GaussianEnsemble& e, const std::string& center_name, std::size_t trials,
                                       Seed seed, std::size_t grid_points = 8, double z_max_factor = 50.0,
                                       std::size_t threads = default_thread_count()) {
  const std::size_t m = e.rows();
  const std::size_t n = e.cols();
  TheoremCheck out;
  out.q_value = estimate_Q(m, n, std::max<std::size_t>(trials, 1000), tagged(seed, "Q"), QMethod::dense, threads).estimate;
  const bounds::BoundContext ctx{m, n, e.sigma(), bounds::LambdaMode::theorem, out.q_value};
  out.zeta = bounds::zeta(ctx);
  const double lambda = ctx.lambda();
  if (grid_points < 2) throw DomainError("z grid needs at least 2 points");
  out.records = run_trials(e, trials, tagged(seed, "trials"), threads);
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double z = out.zeta * std::pow(z_max_factor, static_cast<double>(k) / static_cast<double>(grid_points - 1));
    out.z_grid.push_back(z);
    const double threshold = std::numbers::e * z / (1.0 - lambda);
    std::size_t exceed = 0;
    for (const auto& r : out.records) exceed += r.kappa >= threshold ? 1 : 0;
    out.verdicts.push_back(detail::upper_bound_verdict(
        "tail theorem " + detail::shape(m, n) + " sigma=" + detail::fmt(e.sigma()) + " center=" + center_name +
            " z=" + detail::fmt(z),
        exceed, trials, bounds::theorem_tail_bound(ctx, z)));
  }
  return out;
}

// Average-case sandwich at x in multiples of n - m + 1, A ~ N(0, I), lambda = (m-1)/n.
inline std::vector<Verdict> sandwich_verdicts(std::size_t m, std::size_t n, const std::vector<double>& multiples,
                                              const std::vector<TrialRecord>& records) {
  const std::size_t trials = records.size();
  const double lambda = bounds::elongation(m, n, bounds::LambdaMode::theorem);
  const double codim = static_cast<double>(n - m + 1);
  std::vector<Verdict> out;
  for (double k : multiples) {
    const double x = k * codim;
    const auto s = bounds::chen_dongarra_bounds(m, n, x);
    std::size_t exceed = 0;
    for (const auto& r : records) exceed += r.kappa >= x / (1.0 - lambda) ? 1 : 0;
    const std::string tag = detail::shape(m, n) + " x=" + detail::fmt(x);
    out.push_back(detail::lower_bound_verdict("sandwich lower " + tag, exceed, trials, s.lower));
    out.push_back(detail::upper_bound_verdict("sandwich upper " + tag, exceed, trials, s.upper));
  }
  return out;
}

inline std::vector<Verdict> check_sandwich(std::size_t m, std::size_t n, const std::vector<double>& multiples,
                                           std::size_t trials, Seed seed,
                                           std::size_t threads = default_thread_count()) {
  return sandwich_verdicts(m, n, multiples, run_trials(GaussianEnsemble::standard(m, n), trials, seed, threads));
}

// The sampling, concentration, and pseudo-inverse tail inequalities, plus
// the exact matrix identities, each as one or more verdicts.
inline ExperimentReport verify_inequality_suite(Seed seed, std::size_t trials = 10000,
                                                std::size_t threads = default_thread_count()) {
  using bounds::BoundContext;
  using bounds::LambdaMode;
  ExperimentReport rep;
  rep.command = "verify";
  rep.config = Json{{"seed", seed_json(seed)}, {"trials", trials}};
  const double tol_identity = 1e-8;

  // Spherical caps: P{|u^T v| >= xi} >= sqrt(2/(pi m)) (1 - xi^2)^{(m-1)/2}.
  for (std::size_t m : {2, 5, 20}) {
    for (double xi : {0.1, 0.5, 0.9}) {
      const Seed s = tagged(seed, "cap " + std::to_string(m) + " " + detail::fmt(xi));
      std::vector<char> hit(trials);
      parallel_for(trials, threads, [&](std::size_t i) {
        const Vector v = sample_unit_sphere(m, s.child(i));
        hit[i] = std::abs(v[0]) >= xi;
      });
      const std::size_t hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
      const double md = static_cast<double>(m);
      const double bound = std::sqrt(2.0 / (std::numbers::pi * md)) * std::pow(1.0 - xi * xi, (md - 1.0) / 2.0);
      rep.verdicts.push_back(detail::lower_bound_verdict(
          "spherical cap m=" + std::to_string(m) + " xi=" + detail::fmt(xi), hits, trials, bound));
    }
  }

  // Gaussian concentration of ||X||: P{||X|| >= Q sqrt(n) + t} <= exp(-t^2/2).
  {
    const std::size_t m = 10, n = 20;
    const double q = estimate_Q(m, n, trials, tagged(seed, "spnb Q"), QMethod::dense, threads).estimate;
    std::vector<double> norms(trials);
    const GaussianEnsemble e = GaussianEnsemble::standard(m, n);
    const Seed s = tagged(seed, "spnb");
    parallel_for(trials, threads, [&](std::size_t i) { norms[i] = spectral_norm(sample_gaussian_matrix(e, s.child(i))); });
    for (double t : {0.5, 1.0, 2.0}) {
      const double level = q * std::sqrt(static_cast<double>(n)) + t;
      const std::size_t exceed = static_cast<std::size_t>(
          std::count_if(norms.begin(), norms.end(), [&](double x) { return x >= level; }));
      rep.verdicts.push_back(detail::upper_bound_verdict("norm concentration 10x20 t=" + detail::fmt(t), exceed,
                                                         trials, std::exp(-t * t / 2.0)));
    }
  }

  // Max of chi variables: E max r_i <= max sqrt(f_i) + sqrt(2 ln n) + 1 with f_i = i, n = 50.
  {
    const std::size_t nvars = 50, chi_trials = 2000;
    const Seed s = tagged(seed, "max chi");
    std::vector<double> maxima(chi_trials);
    parallel_for(chi_trials, threads, [&](std::size_t i) {
      Rng rng(s.child(i));
      double mx = 0.0;
      for (std::size_t f = 1; f <= nvars; ++f) mx = std::max(mx, sample_chi(f, rng));
      maxima[i] = mx;
    });
    const auto me = stats::mean_and_se(maxima);
    const double bound = std::sqrt(50.0) + std::sqrt(2.0 * std::log(50.0)) + 1.0;
    rep.verdicts.push_back(Verdict{"max of chi (n=50, f_i=i)", me.mean, "<=", bound,
                                   me.mean - 3.0 * me.standard_error <= bound,
                                   "2000 trials, SE " + detail::fmt(me.standard_error)});
  }

  // Large deviation of ||A||: P{||A|| >= Q sigma sqrt(n) + t + 1} <= exp(-t^2 / (2 sigma^2)), ||Abar|| <= 1.
  {
    struct Case { std::size_t m, n; double sigma; bool ones; };
    for (const Case c : {Case{10, 20, 1.0, false}, Case{10, 20, 0.5, true}, Case{5, 30, 0.25, true}}) {
      const std::string tag = detail::shape(c.m, c.n) + " sigma=" + detail::fmt(c.sigma) + (c.ones ? " ones" : " zero");
      const double q = estimate_Q(c.m, c.n, trials, tagged(seed, "enorm Q " + tag), QMethod::dense, threads).estimate;
      const GaussianEnsemble e(c.ones ? make_ones_center(c.m, c.n, CenterScale::unit_norm) : Matrix(c.m, c.n), c.sigma);
      const auto rs = run_trials(e, trials, tagged(seed, "enorm " + tag), threads);
      for (double tr : {0.5, 1.0, 2.0}) {
        const double t = tr * c.sigma;
        const double level = q * c.sigma * std::sqrt(static_cast<double>(c.n)) + t + 1.0;
        const std::size_t exceed = static_cast<std::size_t>(
            std::count_if(rs.begin(), rs.end(), [&](const TrialRecord& r) { return r.spectral_norm >= level; }));
        rep.verdicts.push_back(detail::upper_bound_verdict("norm large deviation " + tag + " t=" + detail::fmt(t),
                                                           exceed, trials,
                                                           std::exp(-t * t / (2.0 * c.sigma * c.sigma))));
      }
    }
  }

  // Pseudo-inverse tails, including far-from-origin centers (no norm restriction).
  struct PinvCase { std::size_t m, n; double sigma; double center_scale; };
  const PinvCase pinv_cases[] = {{3, 4, 1.0, 0.0}, {5, 8, 0.5, 1.0}, {10, 15, 0.3, 5.0}};
  for (const PinvCase& c : pinv_cases) {
    const std::string tag = detail::shape(c.m, c.n) + " sigma=" + detail::fmt(c.sigma) +
                            " center=" + detail::fmt(c.center_scale) + "*ones/||ones||";
    const GaussianEnsemble e(c.center_scale * make_ones_center(c.m, c.n, CenterScale::unit_norm), c.sigma);
    const BoundContext ctx{c.m, c.n, c.sigma, LambdaMode::theorem, 1.0};
    const double lambda = ctx.lambda();
    const double nd = static_cast<double>(c.n);
    const double exponent = (1.0 - lambda) * nd;
    const auto rs = run_trials(e, trials, tagged(seed, "pinv " + tag), threads);
    for (double level : {0.5, 0.1, 0.01}) {
      // t solving c(lambda) (e / (sigma sqrt(n) t))^{(1-lambda) n} = level
      const double t = std::numbers::e / (c.sigma * std::sqrt(nd)) *
                       std::pow(bounds::c_lambda(lambda) / level, 1.0 / exponent);
      const double thr = t / (1.0 - lambda);
      const std::size_t exceed = static_cast<std::size_t>(
          std::count_if(rs.begin(), rs.end(), [&](const TrialRecord& r) { return r.pinv_norm >= thr; }));
      rep.verdicts.push_back(detail::upper_bound_verdict("pinv tail " + tag + " t=" + detail::fmt(t), exceed, trials,
                                                         bounds::pinv_tail_bound(ctx, t)));
    }

    // Directional version for v = e_m and for a fixed random unit v.
    const Vector v_rand = sample_unit_sphere(c.m, tagged(seed, "direction " + tag));
    const Vector v_em = unit_vector(c.m, c.m - 1);
    std::vector<double> norm_em(trials), norm_rand(trials);
    const Seed s = tagged(seed, "directional " + tag);
    parallel_for(trials, threads, [&](std::size_t i) {
      const Matrix a = sample_gaussian_matrix(e, s.child(i));
      norm_em[i] = norm2(solve_min_norm(a, v_em));
      norm_rand[i] = norm2(solve_min_norm(a, v_rand));
    });
    const double p = static_cast<double>(c.n - c.m + 1);
    for (double level : {0.5, 0.1, 0.01}) {
      // xi solving the directional bound = level (homogeneous of degree -p in xi)
      const double xi = std::pow(bounds::pinv_directional_tail_bound(c.m, c.n, c.sigma, 1.0) / level, 1.0 / p);
      const double bound = bounds::pinv_directional_tail_bound(c.m, c.n, c.sigma, xi);
      auto count = [&](const std::vector<double>& xs) {
        return static_cast<std::size_t>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x >= xi; }));
      };
      rep.verdicts.push_back(detail::upper_bound_verdict("directional pinv tail v=e_m " + tag + " xi=" + detail::fmt(xi),
                                                         count(norm_em), trials, bound));
      rep.verdicts.push_back(detail::upper_bound_verdict(
          "directional pinv tail v=random " + tag + " xi=" + detail::fmt(xi), count(norm_rand), trials, bound));
    }
  }

  // Exact identities on 1000 random matrices with m <= n.
  {
    const std::size_t count = 1000;
    std::vector<double> star(count), sankar_gap(count), sankar_eq(count), mp(count), kinv(count), bidiag(count);
    const Seed s = tagged(seed, "identities");
    parallel_for(count, threads, [&](std::size_t i) {
      Rng rng(s.child(i));
      const std::size_t m = 1 + rng.next_u64() % 8;
      const std::size_t n = m + rng.next_u64() % 8;
      Matrix a(m, n);
      for (double& x : a.data()) x = rng.normal();
      const Matrix pinv = pseudo_inverse(a);
      star[i] = std::abs(norm2(pinv * unit_vector(m, m - 1)) * row_complement(a).norm - 1.0);
      const double pnorm = spectral_norm(pinv);
      const Vector u = sharpest_direction(a).direction;
      const Vector v = sample_unit_sphere(m, rng);
      // relative slack in ||A^+ v|| >= ||A^+|| |u^T v|; negative means violated
      sankar_gap[i] = (norm2(pinv * v) - pnorm * std::abs(dot(u, v))) / pnorm;
      sankar_eq[i] = std::abs(norm2(pinv * u) - pnorm) / (pnorm * tol_svd(m, n));
      const double kappa = condition_number(a);
      // odd trials check the tall shape
      const Matrix shaped = (i % 2 == 1) ? a.transpose() : a;
      mp[i] = moore_penrose_residuals(shaped, pseudo_inverse(shaped)).max() / tol_mp(kappa);
      double dk = std::abs(condition_number(a.transpose()) - kappa);
      for (double c : {1e-6, 1e6}) dk = std::max(dk, std::abs(condition_number(c * a) - kappa));
      kinv[i] = dk / kappa;
      const Vector s1 = singular_values(a);
      const Vector s2 = singular_values(bidiagonalize(a));
      double d = 0.0;
      for (std::size_t k = 0; k < s1.size(); ++k) d = std::max(d, std::abs(s1[k] - s2[k]));
      bidiag[i] = d / (tol_svd(m, n) * s1.front());
    });
    auto mx = [](const std::vector<double>& xs) { return *std::max_element(xs.begin(), xs.end()); };
    const double min_gap = *std::min_element(sankar_gap.begin(), sankar_gap.end());
    rep.verdicts.push_back({"||A^+ e_m|| * ||a_m^perp|| = 1 (max deviation)", mx(star), "<=", tol_identity,
                            mx(star) <= tol_identity, "1000 random matrices"});
    rep.verdicts.push_back({"||A^+ v|| >= ||A^+|| |u_A^T v| (min relative slack)", min_gap, ">=", -1e-12,
                            min_gap >= -1e-12, "1000 (A, v) pairs"});
    rep.verdicts.push_back({"||A^+ u_A|| = ||A^+|| (max relative deviation / tol_svd)", mx(sankar_eq), "<=", 1.0,
                            mx(sankar_eq) <= 1.0, "equality at v = u_A"});
    rep.verdicts.push_back({"Moore-Penrose identities (max residual / tol_mp)", mx(mp), "<=", 1.0, mx(mp) <= 1.0,
                            "tol_mp = 1e-8 kappa"});
    rep.verdicts.push_back({"kappa(A) = kappa(A^T) = kappa(cA) (max relative deviation)", mx(kinv), "<=", 1e-10,
                            mx(kinv) <= 1e-10, "c in {1e-6, 1e6}"});
    rep.verdicts.push_back({"bidiagonalization preserves singular values (max deviation / tol_svd)", mx(bidiag),
                            "<=", 1.0, mx(bidiag) <= 1.0, ""});
  }

  // Scalar inequalities behind the proofs.
  for (const auto& c : bounds::analytic_lemma_checks()) {
    rep.verdicts.push_back({c.name + " (worst margin over grid)", c.worst_margin, ">=", 0.0, c.pass(),
                            std::to_string(c.points) + " grid points, " + std::to_string(c.failures) + " failures"});
  }
  rep.results = Json{{"checks", rep.verdicts.size()}, {"failures", rep.failures()}};
  return rep;
}

}  // namespace smoothcond::experiments
