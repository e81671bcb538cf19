#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmc/pmc.hpp"

namespace pmc::cli {

using nlohmann::json;

struct Outputs {
  std::string report_path;
  std::optional<std::string> mesh_path;
  std::optional<std::string> csv_path;
};

struct RunConfig {
  std::string F;
  int K = 1;
  double r = 0.05;
  double lo = -3.0, hi = -1.0;
  Resolution resolution;
  double nu = 1.5;
  Outputs outputs;
  json source;  // the file as read, echoed into reports
};

struct CommandResult {
  int exit_code = 0;
  json report;
  std::string message;
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoRoot:
    case ErrorKind::DegenerateRoot: return 2;
    case ErrorKind::Infeasible: return 3;
    case ErrorKind::EmbeddingFailure:
    case ErrorKind::SelfIntersection:
    case ErrorKind::GeometryTooTight:
    case ErrorKind::FitFailure: return 4;
    case ErrorKind::NewtonDivergence:
    case ErrorKind::MaxIterations:
    case ErrorKind::EigenSolveFailure:
    case ErrorKind::IllConditioned:
    case ErrorKind::QuadratureNonconvergence: return 5;
    default: return 1;
  }
}

/// "rotating_drop(C)", "charged_film(C, phi)" or an expression in the
/// invariant variables.
inline PMCFunction parse_function(const std::string& text) {
  static const std::regex drop(R"(^\s*rotating_drop\s*\(\s*([^,()]+?)\s*\)\s*$)");
  static const std::regex film(R"(^\s*charged_film\s*\(\s*([^,]+?)\s*,\s*(.+?)\s*\)\s*$)");
  std::smatch m;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) fail(ErrorKind::InvalidArgument, "bad coefficient '" + s + "'");
    return v;
  };
  if (std::regex_match(text, m, drop)) return PMCFunction::rotating_drop(number(m[1].str()));
  if (std::regex_match(text, m, film)) return PMCFunction::charged_film(number(m[1].str()), m[2].str());
  return PMCFunction::expression(text);
}

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::InvalidArgument, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(ErrorKind::InvalidArgument, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorKind::InvalidArgument, std::string("missing key '") + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::InvalidArgument, std::string("key '") + key + "' in " + where + " has the wrong type");
  }
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  using detail::get;
  detail::check_keys(j, {"F", "K", "r", "bracket", "resolution", "nu", "outputs"}, "config");
  RunConfig c;
  c.source = j;
  c.F = get<std::string>(j, "F", "config");
  c.K = get<int>(j, "K", "config");
  c.r = get<double>(j, "r", "config");
  const auto br = get<std::vector<double>>(j, "bracket", "config");
  if (br.size() != 2 || !(br[0] < br[1])) fail(ErrorKind::InvalidArgument, "bracket must be [lo, hi] with lo < hi");
  c.lo = br[0], c.hi = br[1];
  if (j.contains("resolution")) {
    const json& r = j.at("resolution");
    detail::check_keys(r, {"n_profile", "n_angle", "quad_order", "l_max"}, "resolution");
    if (r.contains("n_profile")) c.resolution.n_profile = get<int>(r, "n_profile", "resolution");
    if (r.contains("n_angle")) c.resolution.n_angle = get<int>(r, "n_angle", "resolution");
    if (r.contains("quad_order")) c.resolution.quad_order = get<int>(r, "quad_order", "resolution");
    if (r.contains("l_max")) c.resolution.l_max = get<int>(r, "l_max", "resolution");
  }
  if (j.contains("nu")) c.nu = get<double>(j, "nu", "config");
  const json& o = j.contains("outputs") ? j.at("outputs") : json();
  if (!j.contains("outputs")) fail(ErrorKind::InvalidArgument, "missing key 'outputs' in config");
  detail::check_keys(o, {"report_path", "mesh_path", "csv_path"}, "outputs");
  c.outputs.report_path = get<std::string>(o, "report_path", "outputs");
  if (o.contains("mesh_path")) c.outputs.mesh_path = get<std::string>(o, "mesh_path", "outputs");
  if (o.contains("csv_path")) c.outputs.csv_path = get<std::string>(o, "csv_path", "outputs");

  if (c.K < 1) fail(ErrorKind::InvalidArgument, "K must be positive");
  const Resolution& res = c.resolution;
  if (res.n_profile < 16 || res.n_angle < 3 || res.quad_order < 4 || res.l_max < 8)
    fail(ErrorKind::InvalidArgument, "resolution counts are too small");
  if (!(c.nu > 1.0 && c.nu < 2.0)) fail(ErrorKind::InvalidArgument, "nu must lie in (1, 2)");
  if (!(c.r > 0.0 && c.r <= 0.5)) fail(ErrorKind::InvalidArgument, "r must lie in (0, 0.5]");
  parse_function(c.F);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    if (!out) fail(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::filesystem::path resolve(const std::string& p, const std::optional<std::filesystem::path>& out_dir) {
  std::filesystem::path path(p);
  if (out_dir && path.is_relative()) return *out_dir / path;
  return path;
}

namespace detail {

inline json check(const std::string& name, double value, double threshold, bool pass) {
  return json{{"name", name}, {"pass", pass}, {"threshold", threshold}, {"value", value}};
}

inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= n, my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline json error_json(const Error& e) {
  return json{{"kind", std::string(kind_name(e.kind()))}, {"message", e.what()}};
}

inline json state_json(const BalancingState& st) {
  json j;
  j["C2_response"] = number(st.C2_response);
  j["converged"] = st.converged;
  j["delta"] = vec(st.delta);
  j["eps"] = vec(st.eps);
  j["feasible"] = st.feasible;
  j["iterations"] = st.iterations;
  j["residual"] = vec(st.residual);
  j["residual_norm"] = number(st.residual_norm);
  j["s"] = st.s;
  j["s_balanced"] = st.s_balanced;
  j["sigma"] = vec(st.sigma);
  j["telescoping_eps"] = vec(st.telescoping_eps);
  return j;
}

/// Glued surface for the run: the round sphere at the balanced centre for
/// K = 1, otherwise the balanced configuration.
inline GluedSurface balanced_surface(const RunConfig& c, const PMCFunction& F, double r, BalancingState* state) {
  const Resolution& res = c.resolution;
  if (c.K == 1) {
    Configuration cfg;
    cfg.K = 1;
    cfg.r = r;
    cfg.s = find_balanced_s(F, 1, c.lo, c.hi, res.quad_order).s0;
    return glue(cfg, res.l_max, res.n_profile);
  }
  BalancingState st = balancing_attempt(F, c.K, r, c.lo, c.hi, res);
  if (state) *state = st;
  if (!st.converged) fail(ErrorKind::MaxIterations, "balancing residual did not reach the tolerance");
  Configuration cfg;
  cfg.K = c.K;
  cfg.r = r;
  cfg.s = st.s;
  cfg.sigma = st.sigma;
  cfg.delta = st.delta;
  return glue(cfg, res.l_max, res.n_profile, &st.counts);
}

}  // namespace detail

inline json base_report(const std::string& command, const RunConfig& c) {
  json r;
  r["command"] = command;
  r["config"] = c.source;
  r["results"] = json::object();
  r["checks"] = json::array();
  return r;
}

inline CommandResult cmd_moments(const RunConfig& c, const std::optional<std::filesystem::path>& out_dir) {
  CommandResult res;
  res.report = base_report("moments", c);
  const PMCFunction F = parse_function(c.F);
  const int q = c.resolution.quad_order;
  const std::vector<double> zero_sigma(c.K - 1, 0.0);
  if (c.outputs.csv_path) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "s";
    for (int k = 1; k <= c.K; ++k) csv << ",mu_" << k;
    csv << ",total\n";
    const int rows = c.resolution.n_profile;
    for (int i = 0; i < rows; ++i) {
      const double s = c.lo + (c.hi - c.lo) * i / (rows - 1);
      const MomentVector m = moment_sum(F, s, c.K, zero_sigma, q);
      csv << s;
      for (double x : m.mu) csv << ',' << x;
      csv << ',' << m.total() << '\n';
    }
    write_atomic(resolve(*c.outputs.csv_path, out_dir), csv.str());
  }
  try {
    const BalancedCenter bc = find_balanced_s(F, c.K, c.lo, c.hi, q);
    const MomentVector m = moment_sum(F, bc.s0, c.K, zero_sigma, q);
    res.report["results"] = json{{"F", F.describe()}, {"dsum", bc.dsum}, {"mu", detail::vec(m.mu)}, {"s0", bc.s0}};
    res.report["checks"].push_back(detail::check("moment_sum_at_s0", std::abs(m.total()), 1e-8, std::abs(m.total()) <= 1e-8));
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.message = e.what();
    res.report["error"] = detail::error_json(e);
  }
  return res;
}

inline CommandResult cmd_balance(const RunConfig& c, const std::optional<std::filesystem::path>&) {
  CommandResult res;
  res.report = base_report("balance", c);
  const PMCFunction F = parse_function(c.F);
  if (c.K < 2) fail(ErrorKind::InvalidArgument, "balance needs K >= 2");
  try {
    const BalancingState st = balancing_attempt(F, c.K, c.r, c.lo, c.hi, c.resolution);
    res.report["results"] = detail::state_json(st);
    res.report["checks"].push_back(
        detail::check("residual_norm", st.residual_norm, 1e-8, st.residual_norm <= 1e-8));
    if (!st.converged) {
      res.exit_code = 5;
      res.message = "balancing residual did not reach the tolerance";
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.message = e.what();
    res.report["error"] = detail::error_json(e);
    if (e.kind() == ErrorKind::Infeasible) {
      const BalancedCenter bc = find_balanced_s(F, c.K, c.lo, c.hi, c.resolution.quad_order);
      const MomentVector m = moment_sum(F, bc.s0, c.K, std::vector<double>(c.K - 1, 0.0), c.resolution.quad_order);
      json table = json::array();
      double acc = 0.0;
      std::ostringstream msg;
      msg << e.what() << "\npartial moment sums at s0 = " << bc.s0 << ":";
      for (int k = 0; k < c.K - 1; ++k) {
        acc += m.mu[k];
        table.push_back(json{{"k", k + 1}, {"partial_sum", acc}, {"sign", acc > 0 ? 1 : (acc < 0 ? -1 : 0)}});
        msg << "\n  k = " << k + 1 << "  sum = " << acc;
      }
      res.report["results"] = json{{"partial_sums", table}, {"s0", bc.s0}};
      res.message = msg.str();
    }
  }
  return res;
}

inline CommandResult cmd_assemble(const RunConfig& c, const std::optional<std::filesystem::path>& out_dir) {
  CommandResult res;
  res.report = base_report("assemble", c);
  const PMCFunction F = parse_function(c.F);
  BalancingState st;
  try {
    const GluedSurface s = detail::balanced_surface(c, F, c.r, &st);
    const Mesh mesh = tessellate(s.profile, c.resolution.n_angle);
    json results;
    if (c.K > 1) results["balance"] = detail::state_json(st);
    results["area"] = mesh.area();
    results["euler_characteristic"] = mesh.euler_characteristic();
    results["samples"] = s.profile.size();
    int n_sphere = 0, n_neck = 0;
    for (std::size_t i = 0; i < s.regions.size(); ++i) {
      const bool first = i == 0 || !(s.regions[i] == s.regions[i - 1]);
      if (!first) continue;
      n_sphere += s.regions[i].kind == Region::Kind::Sphere;
      n_neck += s.regions[i].kind == Region::Kind::Neck;
    }
    results["sphere_regions"] = n_sphere;
    results["neck_regions"] = n_neck;
    json waists = json::array();
    for (std::size_t k = 0; k < s.necks.size(); ++k) {
      double w = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < s.regions.size(); ++i)
        if (s.regions[i] == Region{Region::Kind::Neck, static_cast<int>(k) + 1}) w = std::min(w, s.profile[i].rho);
      waists.push_back(json{{"eps", s.necks[k].eps}, {"waist_radius", w}});
    }
    results["necks"] = waists;
    res.report["results"] = results;
    res.report["checks"].push_back(detail::check("euler_characteristic", mesh.euler_characteristic(), 2,
                                                 mesh.euler_characteristic() == 2));
    if (c.outputs.mesh_path) {
      std::ostringstream obj;
      write_obj(obj, mesh, "pmc assemble K=" + std::to_string(c.K) + " F=" + F.describe());
      write_atomic(resolve(*c.outputs.mesh_path, out_dir), obj.str());
    }
    if (c.outputs.csv_path) {
      const WeightFunction zeta = weight_function(s, default_weight_radius);
      std::ostringstream csv;
      csv.precision(17);
      csv << "index,t,x0,rho,region,H,zeta\n";
      for (std::size_t i = 0; i < s.profile.size(); ++i) {
        const auto& p = s.profile[i];
        csv << i << ',' << p.t << ',' << p.x0 << ',' << p.rho << ',' << region_name(s.regions[i]) << ','
            << mean_curvature(s.profile, i) << ',' << zeta.values[i] << '\n';
      }
      write_atomic(resolve(*c.outputs.csv_path, out_dir), csv.str());
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.message = e.what();
    res.report["error"] = detail::error_json(e);
    if (c.K > 1 && !st.residual.empty()) res.report["results"]["balance"] = detail::state_json(st);
  }
  return res;
}

/// Defect scaling, approximate kernel of the F = 0 control and the projected
/// solve, each over the sweep r, r/2 ... taken as {4r, 2r, r}.
inline CommandResult cmd_validate(const RunConfig& c, const std::optional<std::filesystem::path>&) {
  CommandResult res;
  res.report = base_report("validate", c);
  const PMCFunction F = parse_function(c.F);
  const std::vector<double> sweep{4.0 * c.r, 2.0 * c.r, c.r};
  std::vector<std::string> failed;
  json results;

  {  // defect
    json rows = json::array();
    std::vector<double> rs, sups, weighted;
    for (double r : sweep) {
      json row{{"r", r}};
      try {
        const GluedSurface s = detail::balanced_surface(c, F, r, nullptr);
        const DefectReport d = defect(s, F, c.nu);
        row["sup_sphere"] = d.sup_sphere;
        row["sup_transition"] = d.sup_transition;
        row["sup_neck"] = d.sup_neck;
        row["weighted_norm"] = d.weighted_norm;
        rs.push_back(r), sups.push_back(d.sup_sphere), weighted.push_back(d.weighted_norm / (r * r));
      } catch (const Error& e) {
        row["error"] = detail::error_json(e);
      }
      rows.push_back(row);
    }
    results["defect"] = json{{"sweep", rows}};
    const bool complete = rs.size() == sweep.size();
    const double slope = complete ? detail::fit_slope(rs, sups) : std::nan("");
    double ratio = std::nan("");
    if (complete) {
      const auto [mn, mx] = std::minmax_element(weighted.begin(), weighted.end());
      ratio = *mx / *mn;
    }
    results["defect"]["slope"] = detail::number(slope);
    results["defect"]["weighted_constant_ratio"] = detail::number(ratio);
    const bool p1 = complete && slope >= 1.8, p2 = complete && ratio <= 2.0;
    res.report["checks"].push_back(detail::check("defect_slope", complete ? slope : 0.0, 1.8, p1));
    res.report["checks"].push_back(detail::check("defect_weighted_constant_ratio", complete ? ratio : 0.0, 2.0, p2));
    if (!p1 || !p2) failed.push_back("defect");
  }

  {  // spectrum of the F = 0 control
    json rows = json::array();
    bool ok = true;
    const std::vector<double> eps_list = c.K == 1 ? std::vector<double>{0.0} : std::vector<double>{1e-3, 1e-4};
    for (double eps : eps_list) {
      json row;
      try {
        Configuration cfg;
        cfg.K = c.K;
        cfg.r = c.r;
        cfg.s = -(c.K - 1.0);
        for (int k = 0; k + 1 < c.K; ++k) cfg.sigma.push_back(lambda_map(eps)), cfg.delta.push_back(0.0);
        const GluedSurface s = glue(cfg, c.resolution.l_max, c.resolution.n_profile);
        const SpectralReport sp = spectrum(linearized_operator(s, PMCFunction::zero()), c.K + 1);
        row = json{{"eigenvalues", detail::vec(sp.eigenvalues)}, {"kernel_count", sp.kernel_count}};
        if (c.K > 1) row["eps"] = eps;
        const double next = std::abs(sp.eigenvalues.at(c.K));
        ok = ok && sp.kernel_count == c.K && next >= 0.5;
        res.report["checks"].push_back(detail::check(
            "kernel_count" + (c.K > 1 ? "_eps_" + format_number(eps) : std::string()), sp.kernel_count, c.K,
            sp.kernel_count == c.K));
      } catch (const Error& e) {
        row["error"] = detail::error_json(e);
        ok = false;
      }
      rows.push_back(row);
    }
    results["spectrum"] = rows;
    if (!ok) failed.push_back("spectrum");
  }

  {  // projected solve on the single sphere
    json rows = json::array();
    std::vector<double> rs, fs, fw;
    for (double r : sweep) {
      json row{{"r", r}};
      try {
        Configuration cfg;
        cfg.K = 1;
        cfg.r = r;
        cfg.s = -1.0;
        const GluedSurface s = glue(cfg, c.resolution.l_max, c.resolution.n_profile);
        const ProjectedSolution sol = solve_projected(s, F, projection_basis(s), c.nu);
        row["f_sup"] = sol.f_sup;
        row["f_weighted"] = sol.f_weighted;
        row["newton_iters"] = sol.newton_iters;
        row["residual_sup"] = sol.residual_sup;
        rs.push_back(r), fs.push_back(sol.f_sup), fw.push_back(sol.f_weighted);
      } catch (const Error& e) {
        row["error"] = detail::error_json(e);
      }
      rows.push_back(row);
    }
    results["projected"] = json{{"sweep", rows}};
    const bool complete = rs.size() == sweep.size() && fs.back() > 0.0;
    const double s1 = complete ? detail::fit_slope(rs, fs) : 0.0, s2 = complete ? detail::fit_slope(rs, fw) : 0.0;
    results["projected"]["f_sup_slope"] = s1;
    results["projected"]["f_weighted_slope"] = s2;
    res.report["checks"].push_back(detail::check("projected_f_sup_slope", s1, 1.8, complete && s1 >= 1.8));
    res.report["checks"].push_back(detail::check("projected_f_weighted_slope", s2, 1.8, complete && s2 >= 1.8));
    if (!(complete && s1 >= 1.8 && s2 >= 1.8)) failed.push_back("projected");
  }

  res.report["results"] = results;
  if (!failed.empty()) {
    res.exit_code = 5;
    res.message = "failed stages:";
    for (const auto& f : failed) res.message += " " + f;
    res.report["failed_stages"] = failed;
  }
  return res;
}

/// Runs one command and writes its report. Returns the process exit code.
inline int run(const std::string& command, const std::filesystem::path& config_path,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& err) {
  RunConfig c;
  try {
    c = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  CommandResult res;
  try {
    if (command == "moments") res = cmd_moments(c, out_dir);
    else if (command == "balance") res = cmd_balance(c, out_dir);
    else if (command == "assemble") res = cmd_assemble(c, out_dir);
    else if (command == "validate") res = cmd_validate(c, out_dir);
    else {
      err << "error: unknown command " << command << "\n";
      return 1;
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.message = e.what();
    res.report = base_report(command, c);
    res.report["error"] = detail::error_json(e);
  }
  res.report["exit_code"] = res.exit_code;
  try {
    write_atomic(resolve(c.outputs.report_path, out_dir), res.report.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (res.exit_code != 0) err << "error: " << res.message << "\n";
  return res.exit_code;
}

}  // namespace pmc::cli
