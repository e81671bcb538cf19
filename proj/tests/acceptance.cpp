// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "pmc/pmc.hpp"

using namespace pmc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [fail]");
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= n, my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Configuration necklace(int K, double eps, double r = 0.1) {
  Configuration c;
  c.K = K;
  c.sigma.assign(K - 1, lambda_map(eps));
  c.delta.assign(K - 1, 0.0);
  c.s = -(K - 1) - 0.5 * (K - 1) * c.sigma[0];
  c.r = r;
  return c;
}

Outcome moment_oracle() {
  Outcome o;
  double worst = 0.0;
  for (double C : {-1.0, 1.0})
    for (double c : {-3.0, 0.0, 2.5})
      worst = std::max(worst, std::abs(f_moment(PMCFunction::rotating_drop(C), c, 32) - 8.0 * pi / 3.0 * C * c));
  o.require(worst <= 1e-10, "rotating_drop error " + fmt(worst));
  double one = 0.0;
  for (double c : {-3.0, 0.0, 2.5}) one = std::max(one, std::abs(f_moment(PMCFunction::expression("1"), c, 32)));
  o.require(one <= 1e-14, "F=1 moment " + fmt(one));
  return o;
}

Outcome balanced_center() {
  Outcome o;
  for (int K : {2, 3, 5}) {
    const BalancedCenter bc = find_balanced_s(PMCFunction::rotating_drop(-1.0), K, -6.0, 1.0);
    const double ds = std::abs(bc.s0 + (K - 1)), dd = std::abs(std::abs(bc.dsum) - 8.0 * pi * K / 3.0);
    o.require(ds <= 1e-8 && dd <= 1e-4, "K=" + std::to_string(K) + " |s0-s*| " + fmt(ds) + " |dsum| err " + fmt(dd));
  }
  return o;
}

Outcome geometry() {
  Outcome o;
  const int n = 2048;
  auto worst_H = [](const ProfileCurve& c, double target) {
    double w = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) w = std::max(w, std::abs(mean_curvature(c, i) - target));
    return w;
  };
  const ProfileCurve sphere = sphere_profile(0.3, n);
  o.require(worst_H(sphere, 2.0) <= 1e-10, "sphere analytic " + fmt(worst_H(sphere, 2.0)));
  o.require(worst_H(sphere.untagged(), 2.0) <= 1e-6, "sphere fd " + fmt(worst_H(sphere.untagged(), 2.0)));
  for (double eps : {0.3, 0.05}) {
    const ProfileCurve cat = catenoid_profile(eps, 0.2, 4.0 * eps, n);
    const double a = worst_H(cat, 0.0), f = worst_H(cat.untagged(), 0.0);
    o.require(a <= 1e-10 && f <= 1e-6, "catenoid eps=" + fmt(eps) + " analytic " + fmt(a) + " fd " + fmt(f));
  }
  const Mesh m = tessellate(sphere_profile(0.0, 256), 64);
  const double rel = std::abs(m.area() - 4.0 * pi) / (4.0 * pi);
  o.require(m.euler_characteristic() == 2, "euler " + std::to_string(m.euler_characteristic()));
  o.require(rel <= 0.01, "area rel err " + fmt(rel));
  return o;
}

Outcome spectrum_check() {
  Outcome o;
  {
    Configuration c;
    const SpectralReport sp = spectrum(linearized_operator(glue(c, 200, 2048), PMCFunction::zero()), 5);
    std::vector<double> ev = sp.eigenvalues;
    std::sort(ev.begin(), ev.end(), std::greater<>());
    const double expected[5] = {2.0, 0.0, -4.0, -10.0, -18.0};
    double w = 0.0;
    for (int i = 0; i < 5; ++i) w = std::max(w, std::abs(ev[i] - expected[i]));
    o.require(w <= 1e-3, "sphere max err " + fmt(w));
  }
  const Resolution res;
  for (int K : {2, 3})
    for (double eps : {1e-3, 1e-4}) {
      const GluedSurface g = glue(necklace(K, eps), res.l_max, res.n_profile);
      const SpectralReport sp = spectrum(linearized_operator(g, PMCFunction::zero()), K + 1);
      const double next = std::abs(sp.eigenvalues[K]);
      o.require(sp.kernel_count == K && next >= 0.5, "K=" + std::to_string(K) + " eps=" + fmt(eps) + " kernel " +
                                                         std::to_string(sp.kernel_count) + " next " + fmt(next));
    }
  return o;
}

Outcome neck_law() {
  Outcome o;
  std::vector<double> ratio;
  double trip = 0.0;
  for (double sigma : {1e-3, 1e-4, 1e-5}) {
    const double eps = lambda_invert(sigma);
    ratio.push_back(sigma / (eps * std::log(1.0 / eps)));
    trip = std::max(trip, std::abs(lambda_map(eps) / sigma - 1.0));
    trip = std::max(trip, std::abs(lambda_invert(lambda_map(eps)) / eps - 1.0));
  }
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    o.require(ratio[i] >= 0.1 && ratio[i] <= 10.0, "ratio " + fmt(ratio[i]));
    if (i > 0) {
      const double drift = std::abs(ratio[i] / ratio[i - 1] - 1.0);
      o.require(drift < 0.25, "drift " + fmt(drift));
    }
  }
  o.require(trip <= 1e-8, "round trip " + fmt(trip));
  return o;
}

Outcome defect_scaling() {
  Outcome o;
  const Resolution res;
  const std::vector<double> rs{0.2, 0.1, 0.05};
  std::vector<double> sups, consts;
  for (double r : rs) {
    try {
      const BalancingState st = solve_balancing(PMCFunction::rotating_drop(1.0), 3, r, -4.0, 0.0, res);
      Configuration c;
      c.K = 3;
      c.r = r;
      c.s = st.s;
      c.sigma = st.sigma;
      c.delta = st.delta;
      const GluedSurface g = glue(c, res.l_max, res.n_profile, &st.counts);
      const DefectReport d = defect(g, PMCFunction::rotating_drop(1.0), 1.5);
      sups.push_back(d.sup_sphere);
      consts.push_back(d.weighted_norm / (r * r));
      o.require(true, "r=" + fmt(r) + " sup " + fmt(d.sup_sphere) + " weighted/r^2 " + fmt(consts.back()));
    } catch (const Error& e) {
      o.require(false, "r=" + fmt(r) + " no balanced configuration (" + e.what() + ")");
    }
  }
  if (sups.size() == rs.size()) {
    const double slope = fit_slope(rs, sups);
    const auto [mn, mx] = std::minmax_element(consts.begin(), consts.end());
    o.require(slope >= 1.8, "slope " + fmt(slope));
    o.require(*mx / *mn <= 2.0, "constant spread x" + fmt(*mx / *mn));
  }
  return o;
}

Outcome balancing_structure() {
  Outcome o;
  for (int K : {2, 3, 5}) {
    const Eigen::MatrixXd M = balancing_matrix(K);
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(2 * K - 1);
    e.tail(K).setOnes();
    const double v = (e * M).cwiseAbs().maxCoeff();
    o.require(v == 0.0, "K=" + std::to_string(K) + " (0,e)M " + fmt(v));
  }
  const double r = 0.1;
  const GluedSurface g = glue(necklace(3, 1e-4), 200, 512);
  const double C2 = balancing_constants(g, projection_basis(g)).C2;
  const std::vector<double> zero(2, 0.0);
  const NeckScales ns = solve_neck_scales(moment_sum(PMCFunction::rotating_drop(-1.0), -2.0, 3, zero), r, C2);
  const double target = r * r / C2 * 16.0 * pi / 3.0;
  double err = 0.0;
  for (double x : ns.eps) err = std::max(err, std::abs(x / target - 1.0));
  o.require(ns.feasible && err <= 1e-10, "C2=" + fmt(C2) + " pair rel err " + fmt(err));
  o.require(ns.last_residual <= 1e-10, "last residual " + fmt(ns.last_residual));
  const NeckScales bad = solve_neck_scales(moment_sum(PMCFunction::rotating_drop(1.0), -2.0, 3, zero), r, C2);
  o.require(!bad.feasible, "rotating_drop(+1) infeasible");
  return o;
}

Outcome two_stage_solver() {
  Outcome o;
  const Resolution res;
  std::vector<double> gaps;
  for (double r : {0.1, 0.05}) {
    const BalancingState st = balancing_attempt(PMCFunction::rotating_drop(1.0), 3, r, -4.0, 0.0, res);
    o.require(st.converged && st.residual_norm <= 1e-8, "r=" + fmt(r) + " residual " + fmt(st.residual_norm));
    double dmax = 0.0, emax = 0.0;
    for (double d : st.delta) dmax = std::max(dmax, std::abs(d));
    for (std::size_t k = 0; k < st.eps.size(); ++k)
      emax = std::max(emax, std::abs(st.eps[k] / st.telescoping_eps[k] - 1.0));
    o.require(dmax <= r, "r=" + fmt(r) + " |delta|/r " + fmt(dmax / r));
    o.require(emax <= 0.05, "r=" + fmt(r) + " eps vs telescoping " + fmt(emax));
    gaps.push_back(std::abs(st.s + 2.0));
  }
  o.require(gaps[1] < gaps[0], "|s+2| " + fmt(gaps[0]) + " -> " + fmt(gaps[1]));
  return o;
}

Outcome projected_solve() {
  Outcome o;
  const std::vector<double> rs{0.2, 0.1, 0.05};
  std::vector<double> fs;
  auto sphere = [](double r) {
    Configuration c;
    c.s = -1.0;
    c.r = r;
    return glue(c, 200, 512);
  };
  for (double r : rs) {
    try {
      const GluedSurface g = sphere(r);
      const ProjectedSolution p = solve_projected(g, PMCFunction::rotating_drop(1.0), projection_basis(g), 1.5);
      fs.push_back(p.f_sup);
      o.require(true, "r=" + fmt(r) + " |f| " + fmt(p.f_sup) + " in " + std::to_string(p.newton_iters) + " steps");
    } catch (const Error& e) {
      o.require(false, "r=" + fmt(r) + " " + e.what());
    }
  }
  if (fs.size() == rs.size()) {
    const double slope = fit_slope(rs, fs);
    o.require(slope >= 1.8, "slope " + fmt(slope));
  }
  const GluedSurface g = sphere(0.1);
  const ProjectedSolution z = solve_projected(g, PMCFunction::zero(), projection_basis(g), 1.5);
  bool exact = true;
  for (double v : z.f) exact = exact && v == 0.0;
  o.require(exact, "F=0 gives f=0");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("pmc_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string body =
      R"cfg({"F": "rotating_drop(1)", "K": 3, "r": 0.05, "bracket": [-4.0, 0.0],)cfg"
      R"cfg( "outputs": {"report_path": "report.json", "mesh_path": "mesh.obj", "csv_path": "table.csv"}})cfg";
  std::ofstream(dir / "config.json") << body;
  for (const char* cmd : {"moments", "balance", "assemble", "validate"}) {
    std::string runs[2];
    int codes[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path out = dir / (std::string(cmd) + std::to_string(i));
      const std::string line = std::string(PMC_CLI_PATH) + " " + cmd + " --config " + (dir / "config.json").string() +
                               " --out " + out.string() + " 2> /dev/null";
      codes[i] = std::system(line.c_str());
      runs[i] = slurp(out / "report.json");
    }
    o.require(!runs[0].empty() && runs[0] == runs[1] && codes[0] == codes[1],
              std::string(cmd) + " (exit " + std::to_string(WEXITSTATUS(codes[0])) + ")");
  }
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"moment oracle", moment_oracle},
      {"balanced center", balanced_center},
      {"geometry oracles", geometry},
      {"spectrum", spectrum_check},
      {"neck matching law", neck_law},
      {"defect scaling", defect_scaling},
      {"balancing structure", balancing_structure},
      {"two-stage solver", two_stage_solver},
      {"projected solve", projected_solve},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2zu %-20s %s  %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
