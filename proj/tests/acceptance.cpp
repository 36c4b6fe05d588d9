// Acceptance battery: one PASS/FAIL line per criterion, exit 0 only if all
// pass. Each line carries the measured values so a failure is diagnosable
// from the log alone. Criterion 8 compares a finite-n diagnostic against its
// asymptotic closed form and reports the measured gap honestly; see the
// indented note it prints.

#include <fdatest/commands.hpp>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace fdatest;

int g_failures = 0;

std::string strf(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int idx, bool ok, const std::string& detail) {
  std::printf("[%2d] %s %s\n", idx, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void note(const std::string& text) {
  std::printf("     %s\n", text.c_str());
  std::fflush(stdout);
}

// --------------------------------------------------------------------------
// 1. spiked-class smoothness fits match the published pair to 4 decimals

void c1_spiked_fits() {
  const double lambda = calibrate_lambda(127, 64, 1, 0.05, 0.4);
  const auto grid = spiked_j0_grid(127);
  const double s_lo = sobolev_fit_spiked(127, lambda, 127).s;
  const double s_hi = sobolev_fit_spiked(grid[1], lambda, 127).s;
  const bool ok = std::fabs(s_lo - 0.5008) <= 5e-5 && std::fabs(s_hi - 1.1667) <= 5e-5;
  report(1, ok,
         strf("spiked fits s=%.4f (j0=127, want 0.5008) and s=%.4f (j0=%d, want 1.1667)",
              s_lo, s_hi, grid[1]));
}

// --------------------------------------------------------------------------
// 2. smooth-class smoothness fits match the published pair to 3 decimals

void c2_smooth_fits() {
  const double lambda = calibrate_lambda(127, 64, 1, 0.05, 0.4);
  const double m_ref = smooth_reference_M(lambda, 127);
  const double s_lo = sobolev_fit_smooth(0.80, lambda, 127, m_ref).s;
  const double s_hi = sobolev_fit_smooth(0.01, lambda, 127, m_ref).s;
  const bool ok = std::fabs(s_lo - 0.5017) <= 5e-4 && std::fabs(s_hi - 2.4680) <= 5e-4;
  report(2, ok,
         strf("smooth fits s=%.4f (b=0.80, want 0.5017) and s=%.4f (b=0.01, want 2.4680)",
              s_lo, s_hi));
}

// --------------------------------------------------------------------------
// 3. the calibrated energy puts flat-weight power at 0.400 +- 0.012
//    across all 40 alternatives

void c3_uwq_calibration() {
  Timer t;
  const int p = 127;
  const long n = 64;
  const double lambda = calibrate_lambda(p, n, 1, 0.05, 0.4);
  const auto spec = StatSpec::quadratic(p, 1, n, WeightScheme::uwq());
  const double cut = chisq_quantile(p, 0.95);

  std::vector<std::vector<double>> thetas;
  for (int j0 : spiked_j0_grid(p)) thetas.push_back(spiked_theta(j0, lambda, p));
  for (double b : smooth_b_grid()) thetas.push_back(smooth_theta(b, lambda, p));

  double lo = 1.0, hi = 0.0;
  std::uint64_t seed = 301;
  for (const auto& theta : thetas) {
    const double pw = power(spec, theta, cut, 20000, seed++).power;
    lo = std::min(lo, pw);
    hi = std::max(hi, pw);
  }
  const bool ok = thetas.size() == 40 && lo >= 0.400 - 0.012 && hi <= 0.400 + 0.012;
  report(3, ok,
         strf("flat-weight power across %zu alternatives in [%.4f, %.4f], want 0.400 +- 0.012"
              " (%.0fs)",
              thetas.size(), lo, hi, t.seconds()));
}

// --------------------------------------------------------------------------
// 4. power-curve sweep at desk scale: shape and orderings

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

void c4_power_sweep() {
  Timer t;
  Figure4Config cfg;  // p=127, n=64, alpha=0.05, 2e4 cutoff + 2e4 power draws
  const Figure4Result fig = run_figure4(cfg, 401);

  std::map<std::string, std::vector<double>> spiked, smooth;
  std::map<std::string, double> at_b001;
  for (const auto& row : fig.rows) {
    if (row.alt_class == "spiked") {
      spiked[row.statistic].push_back(row.power);
    } else {
      smooth[row.statistic].push_back(row.power);
      if (std::fabs(row.index_value - 0.01) < 1e-12) at_b001[row.statistic] = row.power;
    }
  }

  const auto& htb = spiked.at("htbar");
  const double htb_mean = mean_of(htb);
  double htb_dev = 0.0;
  for (double x : htb) htb_dev = std::max(htb_dev, std::fabs(x - htb_mean));
  const bool ok_a = htb_dev <= 0.07 && htb_mean > 0.55;

  const double m_fzz = mean_of(smooth.at("fzz"));
  const double m_opt = mean_of(smooth.at("opt"));
  const double m_an = mean_of(smooth.at("an"));
  const double m_htb = mean_of(smooth.at("htbar"));
  const bool ok_b = m_fzz >= m_opt && m_opt >= m_an && m_opt > m_htb;

  const double m_cvm_spiked = mean_of(spiked.at("cvm"));
  bool ok_c = true;
  for (const auto& [name, powers] : spiked)
    if (name != "cvm" && mean_of(powers) <= m_cvm_spiked) ok_c = false;

  const double taper_min =
      std::min(at_b001.at("fzz"), std::min(at_b001.at("opt"), at_b001.at("cvm")));
  const bool ok_d = taper_min > 0.4;

  report(4, ok_a && ok_b && ok_c && ok_d,
         strf("sweep(2e4): threshold spiked mean %.3f (> 0.55) flat +-%.3f (<= 0.07);"
              " smooth means fzz %.3f >= opt %.3f >= an %.3f, opt > htbar %.3f;"
              " cvm spiked mean %.3f lowest %s; taper power at b=0.01 >= %.3f (> 0.4)"
              " (%.0fs)",
              htb_mean, htb_dev, m_fzz, m_opt, m_an, m_htb, m_cvm_spiked,
              ok_c ? "yes" : "NO", taper_min, t.seconds()));
}

// --------------------------------------------------------------------------
// 5. size control at simulated cutoffs, rejection rate under a fresh seed

void c5_size_control() {
  Timer t;
  const std::size_t p = 127;
  const long n = 64;
  const std::size_t cut_iters = 200000, rej_iters = 20000;
  std::uint64_t seed = 501;

  std::vector<std::pair<std::string, StatSpec>> specs;
  specs.emplace_back("uwq", StatSpec::quadratic(p, 1, n, WeightScheme::uwq()));
  specs.emplace_back("opt", StatSpec::quadratic(p, 1, n, WeightScheme::opt()));
  specs.emplace_back("cvm", StatSpec::quadratic(p, 1, n, WeightScheme::cvm()));
  specs.emplace_back("fzz", StatSpec::quadratic(p, 1, n, WeightScheme::fzz(1.0)));
  specs.emplace_back("an", StatSpec::adaptive_neyman(p, n));
  specs.emplace_back("ht", StatSpec::ht(p, make_ht_params(n, 1.0)));
  {
    const auto configs = ht_bar_configs(n, 0.5008, 1.1667);
    std::map<int, double> sub_cuts;
    for (const auto& c : configs)
      sub_cuts[c.k_dstar] =
          cutoff(null_sample(StatSpec::ht(p, c), cut_iters, seed++), 0.05);
    specs.emplace_back("htbar", StatSpec::ht_bar(p, configs, sub_cuts));
  }

  const std::vector<double> theta0(p, 0.0);
  const double band = 3.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(rej_iters));
  bool ok = true;
  std::string detail;
  for (const auto& [name, spec] : specs) {
    const double cut = cutoff(null_sample(spec, cut_iters, seed++), 0.05);
    const double rate = power(spec, theta0, cut, rej_iters, seed + 1000 + specs.size()).power;
    ++seed;
    if (std::fabs(rate - 0.05) > band) ok = false;
    detail += strf("%s %.4f ", name.c_str(), rate);
  }
  report(5, ok, strf("null rejection rates: %swant 0.05 +- %.4f (%.0fs)", detail.c_str(),
                     band, t.seconds()));
}

// --------------------------------------------------------------------------
// 6. the combined statistic equals the weighted quadratic form over nu,
//    checked on randomized grouped designs

void c6_cross_identity() {
  double worst = 0.0;
  int n_sets = 0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(RandomStream{601, static_cast<std::uint64_t>(t)});
    const int n_groups = 2 + t % 2;
    const int per_group = 3 + t % 3;
    const int r = 24 + 8 * (t % 3);
    const int p = 4 + t % 8;
    const int n_units = n_groups * per_group;

    GroupLayout layout;
    layout.n_groups = n_groups;
    CurveSet curves = CurveSet::zeros(Grid{0.0, 1.0, r}, 1, n_units);
    for (int k = 0; k < n_units; ++k) {
      const int g = k / per_group;
      layout.group_of.push_back(g);
      layout.covariate.push_back(k % per_group + 0.3 * rng.next_gaussian());
      for (int l = 0; l < r; ++l)
        curves.at(0, k, l) = rng.next_gaussian() + 0.4 * g + 0.1 * layout.covariate.back();
    }

    DesignSpec design;
    design.X = make_group_design(layout);
    design.L = build_hypothesis(HypKind::same_slope, {}, layout);
    const FourierCoeffs coeffs = decompose(curves, p);
    const DiscreteModel model = transform_to_discrete(coeffs, design, SigmaSpec::estimated());

    const WeightScheme scheme = (t % 4 == 0)   ? WeightScheme::opt()
                                : (t % 4 == 1) ? WeightScheme::uwq()
                                : (t % 4 == 2) ? WeightScheme::cvm()
                                               : WeightScheme::fzz(1.3);
    const auto w = make_weights(scheme, model.p, model.n);
    const FPerFreq per = component_F(coeffs, design);
    const double combined = f_global(per.F, w);
    const double quad = quadratic_stat(model, w) / model.nu;
    const double diff = std::fabs(combined - quad) / std::max(1.0, std::fabs(quad));
    worst = std::max(worst, diff);
    ++n_sets;
  }
  report(6, n_sets == 100 && worst <= 1e-10,
         strf("combined F vs weighted form / nu on %d random designs: worst rel diff %.2e"
              " (want <= 1e-10)",
              n_sets, worst));
}

// --------------------------------------------------------------------------
// 7. oracle checks against independent numerics

double simpson(double a, double b, int n_even, double (*f)(double)) {
  const double h = (b - a) / n_even;
  double acc = f(a) + f(b);
  for (int i = 1; i < n_even; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double g_chisq_df = 1.0;
double normal_x2_pdf(double x) {
  return x * x * std::exp(-0.5 * x * x) / std::sqrt(8.0 * std::atan(1.0));
}
double chisq_pdf_at(double x) {
  const double a = 0.5 * g_chisq_df;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

void c7_oracles() {
  Timer t;

  // symmetric inverse square root: H A H == I on a random SPD matrix
  Rng rng(RandomStream{701, 0});
  const std::size_t m = 8;
  Matrix a(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) a(i, j) = a(j, i) = rng.next_gaussian();
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) row += std::fabs(a(i, j));
    a(i, i) = row + 1.0;
  }
  const Matrix h = sym_inv_sqrt(a);
  const Matrix prod = h * (a * h);
  double inv_err = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      inv_err = std::max(inv_err, std::fabs(prod(i, j) - (i == j ? 1.0 : 0.0)));

  // truncated second moment of a standard normal vs direct integration
  double mu_err = 0.0;
  for (int k = 0; k <= 24; ++k) {
    const double xi = 0.25 * k;
    const double integral = 2.0 * simpson(xi, 45.0, 36000, normal_x2_pdf);
    mu_err = std::max(mu_err, std::fabs(mu_ht(xi) - integral));
  }

  // chi-square survival function vs direct integration
  const std::pair<double, double> cases[] = {
      {1.0, 2.5}, {2.0, 0.7}, {5.0, 3.0}, {64.0, 80.0}, {127.0, 154.3}};
  double sf_err = 0.0;
  for (const auto& [df, x] : cases) {
    g_chisq_df = df;
    const double upper = x + 40.0 * std::sqrt(2.0 * df) + 120.0;
    const double integral = simpson(x, upper, 600000, chisq_pdf_at);
    sf_err = std::max(sf_err, std::fabs(detail::chisq_sf_central(df, x) - integral));
  }

  // simulated flat-weight cutoff against the chi-square quantile
  const double cut_sim =
      cutoff(null_sample(StatSpec::quadratic(127, 1, 64, WeightScheme::uwq()), 200000, 702),
             0.05);
  const double cut_ref = chisq_quantile(127, 0.95);

  // taper second-moment sum against a backward harmonic sum
  const auto w = make_weights(WeightScheme::opt(), 127, 64);
  const double s_sum = taper_summaries(w, 127, 127.0).S;
  long double harmonic = 0.0L;
  for (int j = 127; j >= 1; --j) harmonic += 1.0L / j;
  const double h_err = std::fabs(s_sum - static_cast<double>(harmonic));

  const bool ok = inv_err <= 1e-10 && mu_err <= 1e-8 && sf_err <= 1e-8 &&
                  std::fabs(cut_sim - cut_ref) <= 1.0 && h_err <= 1e-12;
  report(7, ok,
         strf("invsqrt err %.1e (<=1e-10); trunc-moment err %.1e (<=1e-8); chisq-sf err %.1e"
              " (<=1e-8); sim cutoff %.2f vs quantile %.2f (+-1.0); harmonic-sum err %.1e"
              " (%.0fs)",
              inv_err, mu_err, sf_err, cut_sim, cut_ref, h_err, t.seconds()));
}

// --------------------------------------------------------------------------
// 8. rate diagnostics for the square-root taper with the cube-root
//    frequency rule

void c8_rates() {
  RatesConfig cfg;  // square-root taper, cbrt p-rule, boundary delta, M=1
  // The cube-root frequency rule keeps seq_i flat only at the critical
  // smoothness (exponent 4s+1 = 3); away from it the sequence drifts as a
  // power of n, so the band check is meaningful at s near 1/2.
  cfg.s = 0.5008;
  cfg.n_grid = default_n_grid();
  const RateProbe probe = rate_probe(cfg);

  const long n_last = probe.n_grid.back();
  const int p_last = probe.p_values.back();
  const double measured = probe.seq_ii.back();
  const double target = std::log(static_cast<double>(n_last)) /
                        std::log(static_cast<double>(p_last));  // M = 1 drops the prefactor
  const double gap = std::fabs(measured / target - 1.0);

  const bool ok_a = probe.ratio_i < 10.0;
  const bool ok_b = gap <= 0.05;
  report(8, ok_a && ok_b,
         strf("seq_i max/min %.4f (< 10 %s); seq_ii at n=2^20 is %.6f vs log(n)/log(p)="
              "%.6f, gap %.2f%% (<= 5%% %s)",
              probe.ratio_i, ok_a ? "ok" : "VIOLATED", measured, target, 100.0 * gap,
              ok_b ? "ok" : "VIOLATED"));
  if (!ok_b) {
    long double hp = 0.0L;
    for (int j = p_last; j >= 1; --j) hp += 1.0L / j;
    note(strf("at finite depth the probe equals log(n)/H_p (harmonic number H_%d = %.4f),"
              " here %.6f;",
              p_last, static_cast<double>(hp),
              std::log(static_cast<double>(n_last)) / static_cast<double>(hp)));
    note(strf("the gap to the asymptotic log(n)/log(p) form is gamma/(log p + gamma)"
              " ~ %.2f%% at p=%d,",
              100.0 * (0.5772156649 / (std::log(static_cast<double>(p_last)) + 0.5772156649)),
              p_last));
    note("shrinking only like 1/log p and independent of the smoothness s and the"
         " bound M, so the");
    note("5% band cannot close on any grid this size; the diagnostic is reported"
         " unadjusted.");
  }
}

// --------------------------------------------------------------------------
// 9. basis decomposition decorrelates dependent noise: squared coefficients
//    of moving-average noise curves are near-uncorrelated

void c9_decorrelation() {
  Timer t;
  MANoiseSpec noise;
  noise.gamma = {0.8, 0.6};
  const int n_rep = 10000, p = 65;
  const CurveSet curves = ma_noise_curves(noise, Grid{0.0, 1.0, 365}, 1, n_rep, 901);
  const FourierCoeffs coeffs = decompose(curves, p);

  std::vector<double> sq(static_cast<std::size_t>(n_rep) * p);
  for (int i = 0; i < n_rep; ++i)
    for (int jj = 0; jj < p; ++jj) {
      const double v = coeffs.at(i, jj, 0);
      sq[static_cast<std::size_t>(i) * p + jj] = v * v;
    }
  std::vector<double> mean(p, 0.0), var(p, 0.0);
  for (int i = 0; i < n_rep; ++i)
    for (int jj = 0; jj < p; ++jj) mean[jj] += sq[static_cast<std::size_t>(i) * p + jj];
  for (auto& v : mean) v /= n_rep;
  for (int i = 0; i < n_rep; ++i)
    for (int jj = 0; jj < p; ++jj) {
      const double d = sq[static_cast<std::size_t>(i) * p + jj] - mean[jj];
      var[jj] += d * d;
    }
  double max_corr = 0.0;
  int arg_j = 0, arg_k = 0;
  for (int jj = 0; jj < p; ++jj)
    for (int kk = jj + 1; kk < p; ++kk) {
      double cov = 0.0;
      for (int i = 0; i < n_rep; ++i)
        cov += (sq[static_cast<std::size_t>(i) * p + jj] - mean[jj]) *
               (sq[static_cast<std::size_t>(i) * p + kk] - mean[kk]);
      const double corr = std::fabs(cov / std::sqrt(var[jj] * var[kk]));
      if (corr > max_corr) {
        max_corr = corr;
        arg_j = jj + 1;
        arg_k = kk + 1;
      }
    }
  report(9, max_corr < 0.05,
         strf("max off-diagonal |corr| of squared coefficients %.4f at (j=%d, k=%d),"
              " want < 0.05 over %d draws (%.0fs)",
              max_corr, arg_j, arg_k, n_rep, t.seconds()));
}

// --------------------------------------------------------------------------
// 10. end-to-end workflow on a generated dataset: a planted slope
//     difference is detected, a null dataset is not flagged

void write_synthetic(const std::string& curves_path, const std::string& meta_path,
                     double bump, std::uint64_t noise_seed) {
  const int r = 128, per_group = 4;
  const char* groups[] = {"low", "mid", "high"};
  const Grid g{0.0, 1.0, r};
  const auto psi5 = basis_eval(5, g);
  Rng rng(RandomStream{noise_seed, 0});

  std::ofstream meta(meta_path);
  meta << "unit,group,covariate\n";
  std::ofstream curves(curves_path);
  curves << "time";
  std::vector<std::vector<double>> cols;
  for (int gi = 0; gi < 3; ++gi)
    for (int m = 1; m <= per_group; ++m) {
      const std::string unit = strf("%s%d", groups[gi], m);
      curves << "," << unit;
      meta << unit << "," << groups[gi] << "," << m << "\n";
      std::vector<double> col(r);
      for (int l = 0; l < r; ++l) {
        const double slope = 1.0 + (gi == 1 ? bump * psi5[l] : 0.0);
        col[l] = 10.0 + m * slope + 0.05 * rng.next_gaussian();
      }
      cols.push_back(std::move(col));
    }
  curves << "\n";
  for (int l = 0; l < r; ++l) {
    curves << fmt_num(g.point(l + 1));
    for (const auto& col : cols) curves << "," << fmt_num(col[l]);
    curves << "\n";
  }
}

void c10_workflow() {
  Timer t;
  std::filesystem::create_directories("acceptance_tmp");
  TestConfig cfg;
  cfg.p = 65;
  cfg.weights = WeightScheme::opt();
  cfg.iterations = 10000;
  cfg.seed = 1003;

  write_synthetic("acceptance_tmp/planted.csv", "acceptance_tmp/planted_meta.csv", 0.8, 777);
  cfg.input = "acceptance_tmp/planted.csv";
  cfg.meta = "acceptance_tmp/planted_meta.csv";
  const TestReport planted = cmd_test(cfg);

  write_synthetic("acceptance_tmp/null.csv", "acceptance_tmp/null_meta.csv", 0.0, 778);
  cfg.input = "acceptance_tmp/null.csv";
  cfg.meta = "acceptance_tmp/null_meta.csv";
  const TestReport null_rep = cmd_test(cfg);

  const bool ok = planted.nu == 2 && planted.argmax_j == 5 && planted.global_p <= 0.01 &&
                  null_rep.global_p > 0.01;
  report(10, ok,
         strf("no packaged dataset; synthetic substitute: planted slope bump p=%.4g at"
              " j=%d (nu=%d), null dataset p=%.3f (%.0fs)",
              planted.global_p, planted.argmax_j, planted.nu, null_rep.global_p,
              t.seconds()));
}

void guarded(int idx, void (*fn)()) {
  try {
    fn();
  } catch (const Error& e) {
    report(idx, false, strf("unexpected error: %s", e.what()));
  } catch (const std::exception& e) {
    report(idx, false, strf("unexpected exception: %s", e.what()));
  }
}

}  // namespace

int main() {
  Timer total;
  guarded(1, c1_spiked_fits);
  guarded(2, c2_smooth_fits);
  guarded(3, c3_uwq_calibration);
  guarded(4, c4_power_sweep);
  guarded(5, c5_size_control);
  guarded(6, c6_cross_identity);
  guarded(7, c7_oracles);
  guarded(8, c8_rates);
  guarded(9, c9_decorrelation);
  guarded(10, c10_workflow);
  std::printf("%d/10 criteria passed (%.0fs)\n", 10 - g_failures, total.seconds());
  return g_failures == 0 ? 0 : 1;
}
