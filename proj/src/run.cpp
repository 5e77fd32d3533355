#include "conemetric/run.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "conemetric/angles.hpp"
#include "conemetric/factorization.hpp"
#include "conemetric/liouville.hpp"
#include "conemetric/pairing.hpp"
#include "conemetric/spectrum.hpp"
#include "conemetric/verify.hpp"
#include "liouville_internal.hpp"

namespace conemetric {

using json = nlohmann::json;

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// nlohmann keeps object keys sorted; only the float format needs replacing.
void dump(const json& j, std::ostream& os, int indent) {
  const std::string pad(indent + 2, ' '), end(indent, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        dump(it.value(), os, indent + 2);
      }
      os << "\n" << end << "}";
      return;
    }
    case json::value_t::array: {
      bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[";
      bool first = true;
      for (auto& e : j) {
        if (!first) os << ",";
        first = false;
        if (flat) {
          if (j.size() > 1 && &e != &j.front()) os << " ";
        } else {
          os << "\n" << pad;
        }
        dump(e, os, indent + 2);
      }
      if (!flat) os << "\n" << end;
      os << "]";
      return;
    }
    case json::value_t::number_float:
      os << num(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

std::string canonical(const json& j) {
  std::ostringstream os;
  dump(j, os, 0);
  os << "\n";
  return os.str();
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json cjson(const std::vector<cplx>& v) {
  json a = json::array();
  for (auto& z : v) a.push_back(cjson(z));
  return a;
}

json tagged(const std::string& command, json tolerances) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["tolerances"] = std::move(tolerances);
  return j;
}

struct Output {
  std::string dir;
  void write(const std::string& name, const std::string& text) const {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw InvalidInput("cannot write " + name + " in " + dir);
    f << text;
  }
};

std::vector<cplx> parse_list(const std::vector<std::string>& v) {
  std::vector<cplx> out;
  for (auto& s : v) out.push_back(parse_complex(s));
  return out;
}

// ---------------------------------------------------------------- angles

struct AnglesOpts {
  int genus = 0;
  std::vector<double> beta, B;
};

json cmd_angles(const AnglesOpts& o) {
  AngleVector av{o.genus, o.beta};
  av.validate();
  json j = tagged("angles", {{"membership", 1e-9}, {"rational", 1e-9}});
  j["genus"] = o.genus;
  j["beta"] = o.beta;
  double chi = conic_euler_char(av);
  j["chi"] = chi;
  try {
    j["troyanov"] = troyanov_check(av);
  } catch (const InvalidInput& e) {
    j["troyanov"] = nullptr;
    j["troyanov_note"] = e.what();
  }
  if (o.genus == 0) {
    j["mp_distance"] = mp_distance(av);
    j["mp_membership"] = to_string(mp_membership(av));
    auto c = coaxial_check(av);
    json cj;
    cj["verdict"] = to_string(c.verdict);
    cj["integer_case"] = c.integer_case;
    cj["eps"] = c.eps;
    cj["kprime"] = c.kprime;
    cj["kdoubleprime"] = c.kdoubleprime;
    cj["rational"] = c.rational;
    if (c.rational) {
      cj["eta"] = json::array({c.eta_num, c.eta_den});
      cj["b"] = c.b;
    }
    cj["note"] = c.note;
    j["coaxial"] = cj;
  }
  j["subcritical"] = subcritical_check(av);
  j["point_count"] = point_count(av);
  if (!o.B.empty()) {
    auto s = splitting_spec(av, o.B);
    json sj;
    sj["k0"] = s.k0;
    sj["K"] = s.K;
    sj["order"] = s.order;
    for (auto& c : s.clusters)
      sj["clusters"].push_back(
          {{"index", c.original_index}, {"beta", c.beta}, {"size", c.size}, {"B", c.B}, {"weights", c.weights}});
    j["split"] = sj;
  }
  return j;
}

// ---------------------------------------------------------------- split

struct SplitOpts {
  std::vector<double> weights;
  std::vector<std::string> coeffs;
  int branch = -1;
  int ray_samples = 0;
};

json cmd_split(const SplitOpts& o) {
  CoeffVector A{parse_list(o.coeffs)};
  if (A.J() == 0) throw InvalidInput("split: --coeffs is empty");
  for (auto& a : A.A)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw InvalidInput("split: coefficients must be finite");
  WeightVector w{o.weights.empty() ? std::vector<double>(A.J(), 1.0) : o.weights};
  if (w.J() != A.J()) throw InvalidInput("split: weights and coefficients differ in length");
  w.validate();
  InverseOptions opt;
  json j = tagged("split", {{"min_step", opt.min_step}, {"newton_tol", opt.newton_tol},
                            {"near_discriminant", opt.near_discriminant}});
  j["J"] = A.J();
  j["weights"] = w.b;
  j["coeffs"] = cjson(A.A);
  j["power_sums"] = cjson(power_sums(A));
  auto inv = inverse_map(A, w, opt);
  j["collapse"] = inv.collapse;
  j["near_discriminant"] = inv.near_discriminant;
  if (o.branch >= static_cast<int>(inv.branches.size())) throw InvalidInput("split: --branch out of range");
  for (auto& b : inv.branches) {
    if (o.branch >= 0 && b.branch_id != o.branch) continue;
    auto back = forward_map(b.z, w);
    double err = 0.0;
    for (int i = 0; i < A.J(); ++i) err = std::max(err, std::abs(back.A[i] - A.A[i]));
    j["branches"].push_back({{"branch_id", b.branch_id},
                             {"z", cjson(b.z)},
                             {"condition", b.condition},
                             {"min_distance", b.min_distance},
                             {"distinct", b.distinct},
                             {"near_discriminant", b.near_discriminant},
                             {"roundtrip_error", err}});
  }
  const int br = std::max(o.branch, 0);
  if (std::abs(A.A.back()) > 0.0) {
    auto e = expansion_coeffs(A.theta(), A.Atilde(), w, br);
    json ej;
    ej["branch_id"] = br;
    ej["theta"] = e.theta;
    ej["rho"] = A.rho();
    for (int i = 0; i < e.c.rows(); ++i) {
      std::vector<cplx> row(e.c.cols());
      for (int k = 0; k < e.c.cols(); ++k) row[k] = e.c(i, k);
      ej["c"].push_back(cjson(row));
    }
    j["expansion"] = ej;
    if (A.J() == 2) {
      auto b = blowup_chart_J2(A, w);
      j["blowup_J2"] = {{"R", b.R},           {"phi", b.phi},         {"z0", cjson(b.z0)},
                        {"z0_2", cjson(b.z0_2)}, {"R_lead", b.R_lead}, {"phi_lead", b.phi_lead},
                        {"z0_2_lead", cjson(b.z0_2_lead)}, {"c", cjson(b.c)}, {"cprime", b.cprime}};
    }
  }
  if (!inv.branches.empty()) {
    auto tree = cluster_tree(inv.branches[br].z);
    for (auto& n : tree) j["clusters"].push_back({{"members", n.members}, {"radius", n.radius}, {"link", n.link}});
  }
  if (o.ray_samples > 0) {
    std::vector<cplx> ring;
    for (int k = 0; k < 48; ++k) ring.push_back(std::polar(0.8, 2.0 * M_PI * (k + 0.25) / 48));
    std::vector<double> ts, errs;
    double t = 1.0;
    for (int s = 0; s < o.ray_samples; ++s, t /= 2.0) {
      CoeffVector At;
      for (auto& a : A.A) At.A.push_back(t * a);
      auto iv = inverse_map(At, w, opt);
      ts.push_back(t);
      errs.push_back(multiplicative_error(At, iv.branches.at(br).z, w, ring));
    }
    j["ray"] = {{"t", ts}, {"error", errs}};
    if (ts.size() >= 2) j["ray"]["slope"] = loglog_slope(ts, errs);
  }
  return j;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumOpts {
  double beta = 1.0;
  double lambda_max = 2.0;
  std::string flow;
  int j_max = 8;
  bool oracle = false;
};

json cmd_spectrum(const SpectrumOpts& o, const Output& out) {
  if (!(o.beta > 0.0)) throw InvalidInput("spectrum: beta must be positive");
  if (!(o.lambda_max > 0.0)) throw InvalidInput("spectrum: lambda-max must be positive");
  json j = tagged("spectrum", {{"count", 1e-9}, {"crossing", 1e-9}, {"oracle_grid", 2048}});
  j["beta"] = o.beta;
  j["lambda_max"] = o.lambda_max;
  std::ostringstream csv;
  csv << "j,ell,lambda,multiplicity,parity\n";
  for (auto& m : football_eigenvalues(o.beta, o.lambda_max))
    for (int p = 0; p < m.multiplicity; ++p) {
      j["rows"].push_back({{"j", m.j}, {"ell", m.ell}, {"lambda", m.lambda}, {"multiplicity", m.multiplicity},
                           {"parity", p == 0 ? "cos" : "sin"}});
      csv << m.j << "," << m.ell << "," << num(m.lambda) << "," << m.multiplicity << "," << (p == 0 ? "cos" : "sin")
          << "\n";
    }
  if (!j.contains("rows")) j["rows"] = json::array();
  j["count_le"] = football_count(o.beta, o.lambda_max, false);
  j["count_lt"] = football_count(o.beta, o.lambda_max, true);
  j["triangle_count_le"] = triangle_count(o.beta, o.lambda_max, false);
  j["triangle_count_lt"] = triangle_count(o.beta, o.lambda_max, true);
  out.write("spectrum.csv", csv.str());
  if (o.oracle) {
    // Radial oracle per angular index; the indices are independent.
    int jmax = 0;
    while (football_lambda(o.beta, jmax + 1, 0) <= o.lambda_max) ++jmax;
    std::vector<SturmLiouvilleResult> res(jmax + 1);
    parallel_for(jmax + 1, [&](int jj) { res[jj] = radial_sturm_liouville(o.beta, jj, 2048, 5); });
    for (int jj = 0; jj <= jmax; ++jj)
      j["oracle"].push_back({{"j", jj}, {"eigenvalues", res[jj].eigenvalues}});
  }
  if (!o.flow.empty()) {
    double a, b;
    int n;
    char c1, c2;
    std::istringstream is(o.flow);
    if (!(is >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 2 || !is.eof())
      throw InvalidInput("spectrum: --flow expects a:b:n with n >= 2");
    std::vector<double> path;
    for (int i = 0; i < n; ++i) path.push_back(a + (b - a) * i / (n - 1));
    auto rep = eigenvalue_flow(path, o.j_max);
    std::ostringstream fc;
    fc << "beta,below,at_most\n";
    for (size_t i = 0; i < path.size(); ++i) fc << num(path[i]) << "," << rep.below[i] << "," << rep.at_most[i] << "\n";
    out.write("flow.csv", fc.str());
    json fj;
    fj["samples"] = n;
    fj["crossings"] = json::array();
    for (auto& c : rep.crossings)
      fj["crossings"].push_back({{"interval", c.interval}, {"beta_lo", c.beta_lo}, {"beta_hi", c.beta_hi},
                                 {"beta_star", c.beta_star}, {"j", c.j}, {"ell", c.ell}, {"jump", c.jump}});
    j["flow"] = fj;
  }
  return j;
}

// ---------------------------------------------------------------- solve

struct SolveOpts {
  std::vector<std::string> points;
  std::vector<double> beta;
  int curvature = 1;
  int mesh = 64;
  int n_theta = 32;
  bool axisym = false;
  bool disk = false;
  double tol = 1e-9;
  double window = 0.5;
  bool project = false;
};

json point_coeffs_json(const PointCoeffs& p) {
  return {{"point", p.point}, {"beta", p.beta},       {"c0", p.c0},
          {"a1", p.a1},       {"a2", p.a2},           {"residual", p.residual},
          {"disagreement", p.disagreement}, {"reliable", p.reliable}};
}

json cmd_solve(const SolveOpts& o, const Output& out) {
  if (o.curvature < -1 || o.curvature > 1) throw InvalidInput("solve: curvature must be -1, 0 or 1");
  if (o.mesh < 8) throw InvalidInput("solve: mesh must be at least 8");
  MeshParams mp;
  mp.n = o.mesh;
  mp.n_theta = o.n_theta;
  mp.axisym = o.axisym;
  mp.tol = o.tol;
  ConicProblem prob;
  if (o.disk) {
    if (o.beta.size() != 1) throw InvalidInput("solve: the disk takes one cone point");
    prob = disk_problem(o.beta[0], o.curvature);
  } else if (o.axisym) {
    if (o.beta.size() != 2) throw InvalidInput("solve: --axisym takes two angles (south, north)");
    prob = football_problem(o.beta[0], o.beta[1], o.curvature);
  } else {
    prob = sphere_problem(parse_list(o.points), o.beta, o.curvature);
  }
  auto m = solve_liouville(prob, mp);
  json j = tagged("solve", {{"newton", mp.tol}, {"window", o.window}, {"extraction", 1e-4}, {"eigen", 1e-10}});
  j["beta"] = prob.beta.beta;
  j["curvature"] = prob.K;
  j["mesh"] = {{"n", mp.n}, {"n_theta", mp.n_theta}, {"axisym", m.axisym()}, {"unknowns", m.w.size()}};
  j["diagnostics"] = {{"iterations", m.diag.iterations}, {"residual", m.diag.residual}, {"area", m.diag.area},
                      {"area_expected", m.diag.area_expected}, {"warnings", m.diag.warnings}};
  j["troyanov"] = prob.troyanov;
  j["subcritical"] = prob.subcritical;
  j["singular_part"] = m.singular_part();
  std::ostringstream csv;
  csv << "x,y,z,u,w\n";
  auto u = m.u();
  for (int i = 0; i < m.w.size(); ++i) {
    const auto& P = m.grid->pos.at(i);
    csv << num(P[0]) << "," << num(P[1]) << "," << num(P[2]) << "," << num(u(i)) << "," << num(m.w(i)) << "\n";
  }
  out.write("samples.csv", csv.str());
  if (prob.background == Background::flat_disk) return j;

  for (int p = 0; p < static_cast<int>(prob.points.size()); ++p) {
    try {
      j["friedrichs"].push_back({{"point", p}, {"slope", friedrichs_fit(m, p).slope}});
    } catch (const InvalidInput& e) {
      j["friedrichs"].push_back({{"point", p}, {"error", e.what()}});
    }
  }
  if (prob.K != 1) return j;
  auto fiber = spectrum_near_two(m, o.window);
  json fj;
  fj["ell"] = fiber.ell;
  fj["window"] = fiber.window;
  fj["eigenvalues"] = fiber.eigenvalues;
  fj["residuals"] = fiber.residuals;
  for (auto& phi : fiber.eigenvectors) {
    json row = json::array();
    for (int p = 0; p < static_cast<int>(prob.points.size()); ++p) row.push_back(point_coeffs_json(extract_eigf_coeffs(m, phi, p)));
    fj["eigen_coeffs"].push_back({{"mode", phi.mode}, {"parity", phi.parity}, {"points", row}});
  }
  if (!fj.contains("eigen_coeffs")) fj["eigen_coeffs"] = json::array();
  j["fiber"] = fj;
  if (o.project && fiber.ell > 0) {
    auto ps = projected_solve(m, fiber);
    j["projected"] = {{"Lambda", ps.Lambda}, {"residual", ps.residual}, {"iterations", ps.iterations}};
  }
  return j;
}

// ---------------------------------------------------------------- pair

struct PairOpts {
  std::string diagnostics;
  std::vector<std::string> direction;
  int branch_id = 0;
};

json cmd_pair(const PairOpts& o) {
  std::ifstream f(o.diagnostics);
  if (!f) throw InvalidInput("pair: cannot read " + o.diagnostics);
  json d;
  try {
    d = json::parse(f);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("pair: malformed diagnostics: ") + e.what());
  }
  if (!d.contains("fiber") || !d.contains("beta")) throw InvalidInput("pair: diagnostics lack fiber or beta");
  std::vector<double> beta = d["beta"].get<std::vector<double>>();
  std::vector<EigenCoeffs> eig;
  bool reliable = true;
  for (auto& row : d["fiber"]["eigen_coeffs"]) {
    EigenCoeffs ec;
    for (auto& p : row["points"]) {
      PointCoeffs pc;
      pc.point = p["point"].get<int>();
      pc.beta = p["beta"].get<double>();
      pc.c0 = p["c0"].get<double>();
      pc.a1 = p["a1"].get<std::vector<double>>();
      pc.a2 = p["a2"].get<std::vector<double>>();
      pc.reliable = p["reliable"].get<bool>();
      reliable = reliable && pc.reliable;
      ec.points.push_back(pc);
    }
    eig.push_back(ec);
  }
  const int ell = d["fiber"]["ell"].get<int>();
  int K = 0, K0 = 0;
  for (double b : beta) {
    K += point_components(b);
    K0 += b > 1.0;
  }
  json j = tagged("pair", {{"rank", 1e-8}});
  j["branch_id"] = o.branch_id;
  j["branch_note"] = "direction coefficients are read against inverse branch branch_id of the splitting";
  j["K"] = K;
  j["K0"] = K0;
  j["ell"] = ell;
  j["coefficients_reliable"] = reliable;
  Eigen::MatrixXd B = eig.empty() ? Eigen::MatrixXd(0, 2 * K) : pairing_matrix(eig);
  j["B"] = json::array();
  for (int i = 0; i < B.rows(); ++i) {
    std::vector<double> r(B.cols());
    for (int c = 0; c < B.cols(); ++c) r[c] = B(i, c);
    j["B"].push_back(r);
  }
  auto V = solution_space(B);
  j["rank"] = V.rank;
  j["dim_V"] = V.dim;
  j["singular_values"] = std::vector<double>(V.singular_values.data(), V.singular_values.data() + V.singular_values.size());
  j["kernel"] = json::array();
  for (int c = 0; c < V.kernel.cols(); ++c) {
    std::vector<double> col(V.kernel.rows());
    for (int r = 0; r < V.kernel.rows(); ++r) col[r] = V.kernel(r, c);
    j["kernel"].push_back(col);
  }
  auto cr = classify_case(ell, K, K0, V.rank, static_cast<int>(beta.size()));
  j["classification"] = {{"case", to_string(cr.kind)}, {"dimension", cr.dimension}, {"kernel_dim", cr.kernel_dim},
                         {"degenerate", cr.degenerate}};
  if (!o.direction.empty()) {
    auto all = parse_list(o.direction);
    std::vector<CoeffVector> A;
    size_t at = 0;
    for (double b : beta) {
      int n = point_components(b);
      if (at + n > all.size()) throw InvalidInput("pair: --direction needs max([beta_j], 1) entries per cone point");
      A.push_back({std::vector<cplx>(all.begin() + at, all.begin() + at + n)});
      at += n;
    }
    if (at != all.size()) throw InvalidInput("pair: --direction has extra entries");
    auto dir = direction_coeffs(A, beta);
    auto flat = dir.flat();
    j["direction"] = std::vector<double>(flat.data(), flat.data() + flat.size());
    std::vector<double> vals;
    for (auto& e : eig) vals.push_back(pairing_B(e, dir));
    j["B_direction"] = vals;
  }
  return j;
}

// ---------------------------------------------------------------- config

// Turns a JSON config into extra command-line tokens; keys already on the command line win.
std::vector<std::string> config_tokens(const json& cfg, const std::set<std::string>& given) {
  std::vector<std::string> t;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string key = it.key();
    if (key == "subcommand") continue;
    std::replace(key.begin(), key.end(), '_', '-');
    if (given.count("--" + key)) continue;
    const json& v = it.value();
    auto scalar = [](const json& e) -> std::string {
      if (e.is_string()) return e.get<std::string>();
      if (e.is_number_integer()) return std::to_string(e.get<long long>());
      if (e.is_number()) return num(e.get<double>());
      throw InvalidInput("config: values must be numbers, strings, booleans or lists");
    };
    if (v.is_boolean()) {
      if (v.get<bool>()) t.push_back("--" + key);
      else if (key.empty()) throw InvalidInput("config: empty key");
      continue;
    }
    t.push_back("--" + key);
    if (v.is_array()) {
      if (v.empty()) throw InvalidInput("config: empty list for " + key);
      for (auto& e : v) t.push_back(scalar(e));
    } else {
      t.push_back(scalar(v));
    }
  }
  return t;
}

}  // namespace

cplx parse_complex(const std::string& s0) {
  std::string s;
  for (char c : s0)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s == "inf" || s == "infinity" || s == "+inf") return {INFINITY, 0.0};
  if (s.empty()) throw InvalidInput("empty complex number");
  auto real_part = [&](const std::string& t) {
    size_t pos = 0;
    double v;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw InvalidInput("not a complex number: " + s0);
    }
    if (pos != t.size() || !std::isfinite(v)) throw InvalidInput("not a complex number: " + s0);
    return v;
  };
  if (s.back() != 'i' && s.back() != 'j') return {real_part(s), 0.0};
  std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that is not part of an exponent.
  size_t split = std::string::npos;
  for (size_t k = body.size(); k-- > 1;)
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  auto imag = [&](std::string t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return real_part(t);
  };
  if (split == std::string::npos) return {0.0, imag(body)};
  return {real_part(body.substr(0, split)), imag(body.substr(split))};
}

int run(const std::vector<std::string>& args0, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = args0;
  try {
    // --config is resolved before parsing so that its keys go through the same validation.
    for (size_t i = 0; i < args.size(); ++i) {
      if (args[i] != "--config") continue;
      if (i + 1 >= args.size()) throw InvalidInput("--config needs a file");
      std::string path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      std::ifstream f(path);
      if (!f) throw InvalidInput("cannot read config " + path);
      json cfg;
      try {
        cfg = json::parse(f);
      } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed config: ") + e.what());
      }
      if (!cfg.is_object()) throw InvalidInput("config must be a JSON object");
      if (args.empty() || args[0].rfind("-", 0) == 0) {
        if (!cfg.contains("subcommand") || !cfg["subcommand"].is_string())
          throw InvalidInput("config: no subcommand given");
        args.insert(args.begin(), cfg["subcommand"].get<std::string>());
      } else if (cfg.contains("subcommand") && cfg["subcommand"] != args[0]) {
        throw InvalidInput("config subcommand differs from the command line");
      }
      std::set<std::string> given(args.begin(), args.end());
      auto extra = config_tokens(cfg, given);
      args.insert(args.end(), extra.begin(), extra.end());
      break;
    }

    CLI::App app{"conemetric: spherical cone metric toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string outdir;
    std::uint64_t seed = 20240611;
    app.add_option("--out", outdir, "directory for JSON and CSV artifacts");
    app.add_option("--seed", seed, "seed for randomized suites");

    AnglesOpts ao;
    auto* angles = app.add_subcommand("angles", "cone angle arithmetic");
    angles->add_option("--genus", ao.genus)->check(CLI::NonNegativeNumber);
    angles->add_option("--beta", ao.beta)->required();
    angles->add_option("--B", ao.B, "splitting targets, cluster by cluster");

    SplitOpts so;
    auto* split = app.add_subcommand("split", "weighted factorization and its inverse branches");
    split->add_option("--weights", so.weights);
    split->add_option("--coeffs", so.coeffs)->required();
    split->add_option("--branch", so.branch);
    split->add_option("--ray-samples", so.ray_samples)->check(CLI::NonNegativeNumber);

    SpectrumOpts po;
    auto* spec = app.add_subcommand("spectrum", "football spectrum, counts and spectral flow");
    spec->add_option("--beta", po.beta)->required()->check(CLI::PositiveNumber);
    spec->add_option("--lambda-max", po.lambda_max)->check(CLI::PositiveNumber);
    spec->add_option("--flow", po.flow, "a:b:n");
    spec->add_option("--j-max", po.j_max)->check(CLI::NonNegativeNumber);
    spec->add_flag("--oracle", po.oracle, "also run the radial Sturm-Liouville oracle");

    SolveOpts vo;
    auto* solve = app.add_subcommand("solve", "Liouville equation solve and obstruction fiber");
    solve->add_option("--points", vo.points, "complex positions, inf for the north pole");
    solve->add_option("--beta", vo.beta)->required();
    solve->add_option("--curvature", vo.curvature);
    solve->add_option("--mesh", vo.mesh);
    solve->add_option("--n-theta", vo.n_theta)->check(CLI::PositiveNumber);
    solve->add_flag("--axisym", vo.axisym);
    solve->add_flag("--disk", vo.disk);
    solve->add_option("--tol", vo.tol)->check(CLI::PositiveNumber);
    solve->add_option("--window", vo.window)->check(CLI::PositiveNumber);
    solve->add_flag("--project", vo.project, "run the projected solve when l > 0");

    PairOpts ro;
    auto* pair = app.add_subcommand("pair", "obstruction pairing from solve diagnostics");
    pair->add_option("--diagnostics", ro.diagnostics)->required();
    pair->add_option("--direction", ro.direction, "A_1.. per cone point, flattened");
    pair->add_option("--branch-id", ro.branch_id);

    std::vector<int> only;
    auto* verify = app.add_subcommand("verify", "acceptance suite");
    verify->add_option("--only", only)->check(CLI::Range(1, kCriteria));

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return exit_ok;
    } catch (const CLI::ParseError& e) {
      throw InvalidInput(e.what());
    }
    Output o{outdir};
    json result;
    if (*angles) result = cmd_angles(ao);
    else if (*split) result = cmd_split(so);
    else if (*spec) result = cmd_spectrum(po, o);
    else if (*solve) result = cmd_solve(vo, o);
    else if (*pair) result = cmd_pair(ro);
    else {
      auto res = run_acceptance(only, seed);
      bool all = true;
      result = tagged("verify", {{"seed", seed}});
      for (auto& r : res) {
        err << format_line(r) << "\n";
        all = all && r.pass;
        // Timings stay out of the JSON so that repeated runs are byte-identical.
        result["criteria"].push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}});
      }
      result["all_pass"] = all;
      auto text = canonical(result);
      o.write("verify.json", text);
      out << text;
      return all ? exit_ok : exit_verification;
    }
    result["seed"] = seed;
    auto text = canonical(result);
    o.write(app.get_subcommands().front()->get_name() + ".json", text);
    out << text;
    return exit_ok;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what();
    if (e.last_residual() >= 0.0) err << " (last residual " << num(e.last_residual()) << ")";
    err << "\n";
    return exit_solver_failure;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return exit_invalid_config;
  }
}

}  // namespace conemetric
