#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "lutzlab/distance.hpp"
#include "lutzlab/family.hpp"
#include "lutzlab/parallel.hpp"
#include "lutzlab/persistence.hpp"
#include "lutzlab/profile.hpp"
#include "lutzlab/reeb.hpp"

namespace lutzlab::cli {

using nlohmann::json;

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

void dump_rec(const json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ',';
          out += nl;
        }
        first = false;
        out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_rec(it.value(), indent, depth + 1, out);
      }
      out += nl + close + '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ',';
          out += nl;
        }
        out += pad;
        dump_rec(j[i], indent, depth + 1, out);
      }
      out += nl + close + ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      // Non-finite values have no JSON literal; they are written as strings.
      out += std::isfinite(v) ? fmt17(v) : "\"" + fmt17(v) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  out += '\n';
  return out;
}

mpq_class parse_rational(const json& j, const std::string& field) {
  try {
    if (j.is_string()) {
      mpq_class q(j.get<std::string>());
      if (sgn(q.get_den()) == 0) throw InputError(field + ": zero denominator");
      q.canonicalize();
      return q;
    }
    if (j.is_number_integer()) return mpq_class(mpz_class(std::to_string(j.get<long long>())));
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw InputError(field + ": not finite");
      return mpq_class(v);
    }
  } catch (const std::invalid_argument&) {
    throw InputError(field + ": not a rational number");
  }
  throw InputError(field + ": expected a number or a \"p/q\" string");
}

FilteredDGA parse_dga(const json& j) {
  if (!j.is_object()) throw InputError("dga: expected a JSON object");
  if (!j.contains("generators") || !j["generators"].is_array()) throw InputError("generators: missing or not an array");
  std::vector<Generator> gens;
  for (std::size_t i = 0; i < j["generators"].size(); ++i) {
    const json& g = j["generators"][i];
    const std::string f = "generators[" + std::to_string(i) + "]";
    if (!g.is_object()) throw InputError(f + ": expected an object");
    if (!g.contains("name") || !g["name"].is_string()) throw InputError(f + ".name: missing or not a string");
    if (!g.contains("degree") || !g["degree"].is_number_integer()) throw InputError(f + ".degree: missing or not an integer");
    if (!g.contains("action")) throw InputError(f + ".action: missing");
    gens.push_back({g["name"].get<std::string>(), static_cast<int>(g["degree"].get<long long>() % 2),
                    parse_rational(g["action"], f + ".action")});
  }
  std::map<std::string, std::vector<Term>> diff;
  if (j.contains("differential")) {
    const json& d = j["differential"];
    if (!d.is_object()) throw InputError("differential: expected an object");
    for (auto it = d.begin(); it != d.end(); ++it) {
      const std::string f = "differential." + it.key();
      if (!it.value().is_array()) throw InputError(f + ": expected an array of terms");
      std::vector<Term> terms;
      for (std::size_t k = 0; k < it.value().size(); ++k) {
        const json& t = it.value()[k];
        const std::string tf = f + "[" + std::to_string(k) + "]";
        if (!t.is_object() || !t.contains("coeff")) throw InputError(tf + ".coeff: missing");
        Term term;
        term.coeff = parse_rational(t["coeff"], tf + ".coeff");
        if (t.contains("word")) {
          if (!t["word"].is_array()) throw InputError(tf + ".word: expected an array of names");
          for (const json& w : t["word"]) {
            if (!w.is_string()) throw InputError(tf + ".word: names must be strings");
            term.word.push_back(w.get<std::string>());
          }
        }
        terms.push_back(std::move(term));
      }
      diff[it.key()] = std::move(terms);
    }
  }
  if (!j.contains("action_cap")) throw InputError("action_cap: missing");
  const mpq_class cap = parse_rational(j["action_cap"], "action_cap");
  if (!j.contains("word_cap") || !j["word_cap"].is_number_integer()) throw InputError("word_cap: missing or not an integer");
  try {
    return FilteredDGA(std::move(gens), std::move(diff), cap, static_cast<int>(j["word_cap"].get<long long>()));
  } catch (const PreconditionFailed& e) {
    throw InputError(e.what());
  }
}

namespace {

struct Artifact {
  std::string file;
  std::string content;
};

// Shared state of one invocation: inputs for the manifest, artifacts, status.
struct Run {
  std::string command;
  json inputs = json::object();
  json tolerances = json::object();
  std::string input_bytes;  // contents of input files, hashed with the flags
  std::vector<Artifact> artifacts;
  bool pass = true;
  std::ostringstream summary;

  void add(std::string file, std::string content) { artifacts.push_back({std::move(file), std::move(content)}); }
};

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
    s += '\n';
  }
  return s;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string rat_str(const mpq_class& q) { return q.get_str(); }

struct PathOptions {
  double eps0 = 0.05;
  double u = 0.05;
  double delta = 0.01;
  double mu_minus = -1.0;
  double delta0 = std::nan("");
  bool raw = false;

  void attach(CLI::App* app) {
    app->add_option("--eps0", eps0, "cap radius epsilon_0")->capture_default_str();
    app->add_option("--u", u, "twist amplitude")->capture_default_str();
    app->add_option("--delta", delta, "perturbation size")->capture_default_str();
    app->add_option("--mu-minus", mu_minus, "minimum of the Morse function")->capture_default_str();
    app->add_option("--delta0", delta0, "mollifier half width (default eps0/100)");
    app->add_flag("--raw", raw, "skip mollification");
  }
  TwistParams params() const {
    TwistParams p;
    p.epsilon0 = eps0;
    p.u = u;
    p.delta = delta;
    p.mu_minus = mu_minus;
    p.delta0 = std::isnan(delta0) ? eps0 / 100.0 : delta0;
    validate(p);
    return with_solved_continuity(p);
  }
  ProfilePair build(const TwistParams& p) const {
    ProfilePair raw_pair = build_paper_path(p);
    if (raw) return raw_pair;
    return mollify(raw_pair, SmoothingWindow::standard(p.epsilon0, p.delta0));
  }
  void record(Run& run) const {
    run.inputs["eps0"] = eps0;
    run.inputs["u"] = u;
    run.inputs["delta"] = delta;
    run.inputs["mu_minus"] = mu_minus;
    run.inputs["delta0"] = std::isnan(delta0) ? eps0 / 100.0 : delta0;
    run.inputs["mollified"] = !raw;
  }
};

json params_json(const TwistParams& p) {
  return {{"epsilon", p.epsilon},   {"epsilon0", p.epsilon0}, {"delta0", p.delta0}, {"delta1", p.delta1},
          {"delta2", p.delta2},     {"delta", p.delta},       {"mu_minus", p.mu_minus},
          {"mu_plus", p.mu_plus},   {"u", p.u}};
}

json formspec_json(const FormSpec& s) {
  return {{"n", s.n},
          {"a", s.a},
          {"b", s.b},
          {"k", s.k},
          {"l", s.l},
          {"scale", s.scale},
          {"u", s.u},
          {"twist", params_json(s.twist)},
          {"floors", {{"A", s.floors.A}, {"B", s.floors.B}}},
          {"compensator",
           {{"amplitude", s.compensator.amplitude},
            {"target_delta_volume", s.compensator.target_delta_volume},
            {"achieved_delta_volume", s.compensator.achieved_delta_volume},
            {"residual", s.compensator.residual},
            {"min_one_plus_nu", s.compensator.min_one_plus_nu},
            {"action_floor", s.compensator.action_floor}}},
          {"tube_volume_unscaled", s.tube_volume_unscaled},
          {"reservoir_volume", s.reservoir_volume},
          {"total_volume", s.total_volume},
          {"claction",
           {{"action_unperturbed", s.claction.action_unperturbed},
            {"perturbed_intercept", s.claction.perturbed_intercept},
            {"second_intercept", s.claction.second_intercept},
            {"pass", s.claction.pass}}},
          {"certified", s.certified},
          {"l_certified", s.l_certified}};
}

json certificate_json(const BoundCertificate& c) {
  json w = json::object();
  for (const auto& [k, v] : c.witnesses) w[k] = v;
  return {{"lower", c.lower},
          {"upper", c.upper},
          {"lower_method", c.lower_method},
          {"upper_method", c.upper_method},
          {"witnesses", w}};
}

json bars_json(const Barcode& bc) {
  json a = json::array();
  for (const Bar& b : bc.bars) {
    a.push_back({{"label", b.label},
                 {"birth", rat_str(b.birth)},
                 {"death", b.death ? json(rat_str(*b.death)) : json("inf")}});
  }
  return a;
}

std::string barcode_csv(const Barcode& bc) {
  std::vector<std::vector<std::string>> rows;
  for (const Bar& b : bc.bars) {
    rows.push_back({b.label, fmt17(b.birth.get_d()), b.death ? fmt17(b.death->get_d()) : "inf"});
  }
  return csv({"label", "birth", "death"}, rows);
}

json read_json_file(const std::string& path, const std::string& field, Run& run) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(field + ": cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  run.input_bytes += ss.str();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw InputError(field + ": " + e.what());
  }
}

std::vector<std::pair<double, double>> grid_points(int n, double a_min, double a_max, double l_min,
                                                   double l_max) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = n == 1 ? a_min : a_min + (a_max - a_min) * i / (n - 1);
      const double l = n == 1 ? l_min : l_min + (l_max - l_min) * j / (n - 1);
      pts.emplace_back(a, std::log(l));
    }
  }
  return pts;
}

int write_outputs(Run& run, const std::string& out_dir, std::ostream& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw InputError("--out: cannot create directory " + out_dir);

  json manifest;
  manifest["tool"] = "lutzlab";
  manifest["version"] = "0.1.0";
  manifest["command"] = run.command;
  manifest["inputs"] = run.inputs;
  manifest["tolerances"] = run.tolerances;
  const std::string canon = dump_json(run.inputs, 0);
  manifest["inputs_hash"] = "fnv1a64:" + hex64(fnv1a64(run.input_bytes, fnv1a64(canon)));
  manifest["status"] = run.pass ? "pass" : "fail";
  json arts = json::array();
  for (const Artifact& a : run.artifacts) {
    const fs::path p = fs::path(out_dir) / a.file;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError("--out: cannot write " + p.string());
    f << a.content;
    arts.push_back({{"file", a.file}, {"fnv1a64", hex64(fnv1a64(a.content))}});
  }
  manifest["artifacts"] = arts;
  {
    std::ofstream f(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!f) throw InputError("--out: cannot write manifest.json");
    f << dump_json(manifest);
  }
  out << run.summary.str();
  out << "status: " << (run.pass ? "pass" : "fail") << "\n";
  return run.pass ? kExitPass : kExitAssertion;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lutzlab: Lutz-twist contact forms, Reeb dynamics, distance bounds and persistence"};
  app.require_subcommand(1);
  std::string out_dir = "lutzlab-out";
  int threads = 0;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0: LUTZLAB_THREADS or hardware)")
      ->check(CLI::NonNegativeNumber);

  Run run;
  std::function<void()> action;

  // profile
  auto* profile = app.add_subcommand("profile", "build and validate the twist path");
  profile->require_subcommand(1);
  PathOptions pb_opts;
  int pb_samples = 1001;
  auto* pb = profile->add_subcommand("build", "build the path and sample it");
  pb_opts.attach(pb);
  pb->add_option("--samples", pb_samples, "number of sample rows")->check(CLI::Range(2, 10000000));
  pb->callback([&] {
    action = [&] {
      run.command = "profile build";
      pb_opts.record(run);
      run.inputs["samples"] = pb_samples;
      const TwistParams p = pb_opts.params();
      const ProfilePair pair = pb_opts.build(p);
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : sample_pair(pair, pb_samples)) {
        std::vector<std::string> row;
        for (double v : r) row.push_back(fmt17(v));
        rows.push_back(std::move(row));
      }
      run.add("profile.csv", csv({"r", "h1", "h2", "h1p", "h2p", "D"}, rows));
      json segs = json::object();
      for (const auto& [name, prof] : {std::pair{"h1", &pair.h1}, std::pair{"h2", &pair.h2}}) {
        json a = json::array();
        const auto& bp = prof->breakpoints();
        for (std::size_t i = 0; i < prof->segments().size(); ++i)
          a.push_back({{"lo", bp[i]}, {"hi", bp[i + 1]}, {"kind", segment_kind(prof->segments()[i])}});
        segs[name] = a;
      }
      run.add("profile.json", dump_json({{"params", params_json(p)}, {"segments", segs}}));
      run.summary << "delta1 " << fmt17(p.delta1) << "\ndelta2 " << fmt17(p.delta2) << "\n";
    };
  });

  PathOptions pc_opts;
  int pc_grid = 10000;
  auto* pc = profile->add_subcommand("check", "contact condition and winding number");
  pc_opts.attach(pc);
  pc->add_option("--grid", pc_grid, "grid size")->check(CLI::Range(2, 100000000));
  pc->callback([&] {
    action = [&] {
      run.command = "profile check";
      pc_opts.record(run);
      run.inputs["grid"] = pc_grid;
      const TwistParams p = pc_opts.params();
      const ProfilePair pair = pc_opts.build(p);
      const ContactReport c = check_contact_condition(pair, pc_grid);
      const int w = winding_number(pair);
      run.tolerances["min_abs_d_over_r"] = 1e-6;
      run.add("contact.json", dump_json({{"min_abs_d_over_r", c.min_abs_d_over_r},
                                         {"r_at_min", c.r_at_min},
                                         {"sign", c.sign},
                                         {"grid", c.grid},
                                         {"winding_number", w},
                                         {"pass", c.pass}}));
      run.pass = c.pass;
      run.summary << "min |D/r| " << fmt17(c.min_abs_d_over_r) << " at r = " << fmt17(c.r_at_min)
                  << "\nwinding " << w << "\n";
    };
  });

  PathOptions pm_opts;
  std::vector<double> pm_sweep = {1e-2, 1e-3, 1e-4};
  int pm_grid = 4001;
  auto* pm = profile->add_subcommand("mollify", "smoothing bound over a delta0 sweep");
  pm_opts.attach(pm);
  pm->add_option("--sweep", pm_sweep, "delta0 values as fractions of eps0")->delimiter(',')->capture_default_str();
  pm->add_option("--grid", pm_grid, "grid size")->check(CLI::Range(2, 100000000));
  pm->callback([&] {
    action = [&] {
      run.command = "profile mollify";
      pm_opts.record(run);
      run.inputs["sweep"] = pm_sweep;
      run.inputs["grid"] = pm_grid;
      const TwistParams base = pm_opts.params();
      std::vector<std::vector<std::string>> rows;
      double prev = std::numeric_limits<double>::infinity();
      bool decreasing = true;
      SmoothingBound last;
      for (double f : pm_sweep) {
        if (!(f > 0.0)) throw InputError("--sweep: fractions must be positive");
        TwistParams q = base;
        q.delta0 = f * q.epsilon0;
        validate(q);
        const ProfilePair s = mollify(build_paper_path(q), SmoothingWindow::standard(q.epsilon0, q.delta0));
        last = verify_smoothing_bound(s, q.u, pm_grid);
        decreasing = decreasing && last.max_ratio < prev;
        prev = last.max_ratio;
        rows.push_back({fmt17(q.delta0), fmt17(last.max_ratio), fmt17(last.r_at_max), fmt17(last.bound),
                        last.pass ? "1" : "0"});
        run.summary << "delta0 " << fmt17(q.delta0) << " max ratio " << fmt17(last.max_ratio) << " bound "
                    << fmt17(last.bound) << "\n";
      }
      run.add("smoothing.csv", csv({"delta0", "max_ratio", "r_at_max", "bound", "pass"}, rows));
      run.pass = decreasing && last.pass;
      run.add("smoothing.json", dump_json({{"strictly_decreasing", decreasing}, {"final_below_bound", last.pass}}));
    };
  });

  // reeb
  auto* reeb = app.add_subcommand("reeb", "Reeb dynamics of the twist tube");
  reeb->require_subcommand(1);
  PathOptions rs_opts;
  int rs_pq = 3, rs_grid = 20000;
  auto* rs = reeb->add_subcommand("scan", "torus orbit families by resonance");
  rs_opts.attach(rs);
  rs->add_option("--pq-max", rs_pq, "largest |p|, q")->check(CLI::Range(1, 1000));
  rs->add_option("--grid", rs_grid, "radial grid")->check(CLI::Range(16, 100000000));
  rs->callback([&] {
    action = [&] {
      run.command = "reeb scan";
      rs_opts.record(run);
      run.inputs["pq_max"] = rs_pq;
      run.inputs["grid"] = rs_grid;
      const TwistParams p = rs_opts.params();
      const auto fams = resonance_scan(rs_opts.build(p), rs_pq, rs_grid);
      std::vector<std::vector<std::string>> rows;
      for (const auto& f : fams) {
        rows.push_back({fmt17(f.r0), std::to_string(f.p), std::to_string(f.q), fmt17(f.period), fmt17(f.action),
                        f.morse_bott ? "1" : "0", f.continuum ? "1" : "0", fmt17(f.r_end),
                        std::string(1, f.formula), fmt17(f.crosscheck)});
      }
      run.add("resonances.csv",
              csv({"r0", "p", "q", "period", "action", "morse_bott", "continuum", "r_end", "formula", "crosscheck"},
                  rows));
      run.summary << fams.size() << " families\n";
    };
  });

  PathOptions rm_opts;
  auto* rm = reeb->add_subcommand("minima", "intercepts of h1 = 0 and their actions");
  rm_opts.attach(rm);
  rm->callback([&] {
    action = [&] {
      run.command = "reeb minima";
      rm_opts.record(run);
      const ActionMinima m = action_minima(rm_opts.build(rm_opts.params()));
      run.add("minima.json", dump_json({{"r_plus", m.r_plus},
                                        {"r_plus_prime", m.r_plus_prime},
                                        {"action_plus", m.action_plus},
                                        {"action_plus_prime", m.action_plus_prime}}));
      run.summary << "action(r+) " << fmt17(m.action_plus) << "\naction(r+') " << fmt17(m.action_plus_prime) << "\n";
    };
  });

  PathOptions rc_opts;
  int rc_k = 1;
  double rc_shear = std::nan("");
  auto* rc = reeb->add_subcommand("cz", "Conley-Zehnder index of the k-fold core orbit or a shear");
  rc_opts.attach(rc);
  rc->add_option("--k", rc_k, "iterate")->check(CLI::Range(1, 1000000));
  rc->add_option("--shear", rc_shear, "index of the shear path [[1, -f t], [0, 1]] instead");
  rc->callback([&] {
    action = [&] {
      run.command = "reeb cz";
      rc_opts.record(run);
      run.inputs["cover"] = rc_k;
      if (!std::isnan(rc_shear)) {
        run.inputs["shear"] = rc_shear;
        const double s = rc_shear;
        const double idx = cz_sp2_path([s](double t) { return Mat2{1.0, -s * t, 0.0, 1.0}; });
        run.add("cz.json", dump_json({{"shear", s}, {"index", idx}}));
        run.summary << "shear index " << fmt17(idx) << "\n";
        return;
      }
      const CoreCz c = core_orbit_cz(rc_opts.build(rc_opts.params()), rc_k);
      run.add("cz.json", dump_json({{"cover", rc_k},
                                    {"degenerate", c.degenerate},
                                    {"index", c.index},
                                    {"argument", c.argument},
                                    {"nearness", c.nearness}}));
      run.summary << "CZ " << c.index << (c.degenerate ? " (degenerate)" : "") << "\n";
    };
  });

  PathOptions rp_opts;
  double rp_floor = 1.0;
  auto* rp = reeb->add_subcommand("perturb", "Morse-Bott perturbation at r+");
  rp_opts.attach(rp);
  rp->add_option("--floor-a", rp_floor, "ambient action floor A")->check(CLI::PositiveNumber);
  rp->callback([&] {
    action = [&] {
      run.command = "reeb perturb";
      rp_opts.record(run);
      run.inputs["floor_a"] = rp_floor;
      const TwistParams p = rp_opts.params();
      const ProfilePair pair = rp_opts.build(p);
      const PerturbedOrbits o = perturb(pair, p);
      const ClactionReport c = claction_check(pair, p, rp_floor);
      json j = {{"action_hyperbolic", o.action_hyperbolic},
                {"action_elliptic", o.action_elliptic},
                {"r_plus", o.r_plus},
                {"degree_hyperbolic", o.degree_hyperbolic},
                {"shear_rate", o.shear_rate},
                {"shear_index", o.shear_index},
                {"cz_hyperbolic", o.cz_hyperbolic},
                {"cz_elliptic", o.cz_elliptic},
                {"claction_pass", c.pass}};
      if (c.pass) j["l_invariant"] = l_invariant(pair, p, rp_floor);
      run.add("perturb.json", dump_json(j));
      run.pass = c.pass;
      run.summary << "action hyperbolic " << fmt17(o.action_hyperbolic) << "\ndegree " << o.degree_hyperbolic << "\n";
    };
  });

  // family
  auto* family = app.add_subcommand("family", "the two-parameter family of forms");
  family->require_subcommand(1);
  int fam_n = 2;
  double fe_a = 0.0, fe_b = 0.0;
  auto* fe = family->add_subcommand("embed", "form spec at (a, b) = (ln k^(1/n), ln l)");
  fe->add_option("--a", fe_a, "ln k^(1/n)")->required();
  fe->add_option("--b", fe_b, "ln l")->required();
  fe->add_option("--n", fam_n, "dimension parameter n")->check(CLI::Range(2, 8));
  fe->callback([&] {
    action = [&] {
      run.command = "family embed";
      run.inputs["a"] = fe_a;
      run.inputs["b"] = fe_b;
      run.inputs["n"] = fam_n;
      FamilyConfig cfg = default_family_config();
      cfg.n = fam_n;
      const FamilyModel model(cfg);
      const FormSpec s = model.embed_point(fe_a, fe_b);
      run.add("formspec.json", dump_json(formspec_json(s)));
      run.pass = s.certified;
      run.summary << "k " << fmt17(s.k) << "\nl " << fmt17(s.l) << "\nl_certified " << fmt17(s.l_certified)
                  << "\ntotal_volume " << fmt17(s.total_volume) << "\n";
    };
  });

  int fw_n = 5;
  double fw_amin = -0.25, fw_amax = 0.25, fw_lmin = 0.02, fw_lmax = 0.06;
  SweepTolerances fw_tol;
  auto* fw = family->add_subcommand("sweep", "bi-Lipschitz sandwich over a grid");
  fw->add_option("--grid-n", fw_n, "points per axis")->check(CLI::Range(1, 100));
  fw->add_option("--a-min", fw_amin)->capture_default_str();
  fw->add_option("--a-max", fw_amax)->capture_default_str();
  fw->add_option("--l-min", fw_lmin)->check(CLI::PositiveNumber)->capture_default_str();
  fw->add_option("--l-max", fw_lmax)->check(CLI::PositiveNumber)->capture_default_str();
  fw->add_option("--lower-tol", fw_tol.lower_tol)->check(CLI::PositiveNumber)->capture_default_str();
  fw->add_option("--upper-tol", fw_tol.upper_tol)->check(CLI::PositiveNumber)->capture_default_str();
  fw->callback([&] {
    action = [&] {
      run.command = "family sweep";
      run.inputs["grid_n"] = fw_n;
      run.inputs["a_range"] = {fw_amin, fw_amax};
      run.inputs["l_range"] = {fw_lmin, fw_lmax};
      run.tolerances["lower_tol"] = fw_tol.lower_tol;
      run.tolerances["upper_tol"] = fw_tol.upper_tol;
      const FamilyModel model;
      const auto points = grid_points(fw_n, fw_amin, fw_amax, fw_lmin, fw_lmax);
      std::vector<std::vector<std::string>> grid_rows;
      for (const auto& [a, b] : points) {
        const FormSpec s = model.embed_point(a, b);
        const bool proxy = s.compensator.action_floor >= std::exp(model.epsilon());
        grid_rows.push_back({fmt17(a), fmt17(b), fmt17(s.k), fmt17(s.l), fmt17(s.total_volume),
                             fmt17(s.l_certified), s.certified ? fmt17(systolic_ratio(s)) : "nan",
                             std::string("claction=") + (s.claction.pass ? "1" : "0") +
                                 ";floor_proxy=" + (proxy ? "1" : "0")});
      }
      run.add("family_grid.csv",
              csv({"a", "b", "k", "l", "volume", "l_inv", "sys_ratio", "cert_flags"}, grid_rows));
      const SweepReport rep = bilipschitz_sweep(model, points, fw_tol, static_cast<std::size_t>(threads));
      std::vector<std::vector<std::string>> rows;
      for (const SweepRow& r : rep.rows) {
        rows.push_back({fmt17(r.a1), fmt17(r.b1), fmt17(r.a2), fmt17(r.b2), fmt17(r.dinf), fmt17(r.lower),
                        fmt17(r.upper), fmt17(r.slack), r.pass ? "1" : "0", std::to_string(r.i),
                        std::to_string(r.j), "\"" + r.failure + "\""});
      }
      run.add("sweep.csv",
              csv({"a1", "b1", "a2", "b2", "dinf", "lower", "upper", "slack", "pass", "i", "j", "failure"}, rows));
      run.add("sweep.json", dump_json({{"pairs", rep.rows.size()},
                                       {"failures", rep.failures},
                                       {"worst_slack", rep.worst_slack},
                                       {"all_pass", rep.all_pass}}));
      run.pass = rep.all_pass;
      run.summary << rep.rows.size() << " pairs, " << rep.failures << " failures, worst slack "
                  << fmt17(rep.worst_slack) << "\n";
    };
  });

  double fs_a = 0.0, fs_b = std::log(0.04);
  std::vector<double> fs_factors = {0.5, 2.0, std::exp(1.0)};
  double fs_tol = 1e-10;
  auto* fsc = family->add_subcommand("scaling", "volume and l-invariant scaling under C alpha");
  fsc->add_option("--a", fs_a)->capture_default_str();
  fsc->add_option("--b", fs_b)->capture_default_str();
  fsc->add_option("--n", fam_n, "dimension parameter n")->check(CLI::Range(2, 8));
  fsc->add_option("--factor", fs_factors, "scale factors C")->delimiter(',');
  fsc->add_option("--tol", fs_tol, "relative tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  fsc->callback([&] {
    action = [&] {
      run.command = "family scaling";
      run.inputs["a"] = fs_a;
      run.inputs["b"] = fs_b;
      run.inputs["n"] = fam_n;
      run.inputs["factors"] = fs_factors;
      run.tolerances["relative"] = fs_tol;
      FamilyConfig cfg = default_family_config();
      cfg.n = fam_n;
      const FamilyModel model(cfg);
      const FormSpec s = model.embed_point(fs_a, fs_b);
      std::vector<std::vector<std::string>> rows;
      for (double C : fs_factors) {
        if (!(C > 0.0)) throw InputError("--factor: scale factors must be positive");
        const ScalingReport r = scaling_check(model, s, C, fs_tol);
        rows.push_back({fmt17(C), std::to_string(r.n), fmt17(r.volume_ratio), fmt17(r.volume_expected),
                        fmt17(r.volume_rel_error), fmt17(r.l_ratio), fmt17(r.l_rel_error), r.pass ? "1" : "0"});
        run.pass = run.pass && r.pass;
      }
      run.add("scaling.csv",
              csv({"C", "n", "volume_ratio", "volume_expected", "volume_rel_error", "l_ratio", "l_rel_error", "pass"},
                  rows));
      run.summary << fs_factors.size() << " factors checked\n";
    };
  });

  // distance
  auto* distance = app.add_subcommand("distance", "bounds on the contact Banach-Mazur distance");
  distance->require_subcommand(1);
  double d_a1 = 0.0, d_b1 = std::log(0.04), d_a2 = 0.1, d_b2 = std::log(0.05);
  TriangleOptions d_opt;
  auto pair_opts = [&](CLI::App* sc) {
    sc->add_option("--a1", d_a1)->capture_default_str();
    sc->add_option("--b1", d_b1)->capture_default_str();
    sc->add_option("--a2", d_a2)->capture_default_str();
    sc->add_option("--b2", d_b2)->capture_default_str();
    sc->add_option("--r-grid", d_opt.r_grid, "radial grid of the Gray sup")->check(CLI::Range(8, 10000000));
    sc->add_option("--tol", d_opt.tol, "Gray integral tolerance")->check(CLI::PositiveNumber);
  };
  auto record_pair = [&] {
    run.inputs["a1"] = d_a1;
    run.inputs["b1"] = d_b1;
    run.inputs["a2"] = d_a2;
    run.inputs["b2"] = d_b2;
    run.inputs["r_grid"] = d_opt.r_grid;
    run.tolerances["gray_tol"] = d_opt.tol;
  };

  auto* dl = distance->add_subcommand("lower", "volume and l-invariant lower bound");
  pair_opts(dl);
  dl->callback([&] {
    action = [&] {
      run.command = "distance lower";
      record_pair();
      const FamilyModel model;
      const BoundCertificate c = lower_bound(model.embed_point(d_a1, d_b1), model.embed_point(d_a2, d_b2));
      run.add("lower.json", dump_json(certificate_json(c)));
      run.summary << "lower " << fmt17(c.lower) << " (" << c.lower_method << ")\n";
    };
  });

  auto* du = distance->add_subcommand("upper", "triangle upper bound through scaling and a Gray path");
  pair_opts(du);
  du->callback([&] {
    action = [&] {
      run.command = "distance upper";
      record_pair();
      const FamilyModel model;
      const BoundCertificate c =
          triangle_ub(model, model.embed_point(d_a1, d_b1), model.embed_point(d_a2, d_b2), d_opt);
      run.add("upper.json", dump_json(certificate_json(c)));
      run.summary << "upper " << fmt17(c.upper) << "\n";
    };
  });

  GrayPathSpec g_spec;
  g_spec.u_start = 0.04;
  g_spec.u_end = 0.06;
  auto* dg = distance->add_subcommand("gray", "Gray-path integral between two amplitudes");
  dg->add_option("--u-start", g_spec.u_start)->check(CLI::PositiveNumber)->capture_default_str();
  dg->add_option("--u-end", g_spec.u_end)->check(CLI::PositiveNumber)->capture_default_str();
  dg->add_option("--r-grid", g_spec.r_grid)->check(CLI::Range(8, 10000000))->capture_default_str();
  dg->add_option("--tol", g_spec.tol)->check(CLI::PositiveNumber)->capture_default_str();
  dg->callback([&] {
    action = [&] {
      run.command = "distance gray";
      run.inputs["u_start"] = g_spec.u_start;
      run.inputs["u_end"] = g_spec.u_end;
      run.inputs["r_grid"] = g_spec.r_grid;
      run.tolerances["tol"] = g_spec.tol;
      const FamilyModel model;
      g_spec.family = model.family_ptr();
      const GrayResult r = gray_integral(g_spec);
      std::vector<std::vector<std::string>> rows;
      for (const GraySample& s : r.samples) rows.push_back({fmt17(s.u), fmt17(s.r_argmax), fmt17(s.sup)});
      run.add("gray.csv", csv({"u", "r_argmax", "sup"}, rows));
      run.add("gray.json", dump_json({{"value", r.value}, {"samples", r.samples.size()}}));
      run.summary << "gray " << fmt17(r.value) << "\n";
    };
  });

  double f_a1 = 1.0, f_a2 = 3.0, f_ball = 0.5, f_delta = 0.4;
  auto* dfo = distance->add_subcommand("fold", "inclusion and folding bounds for an ellipsoid in a ball");
  dfo->add_option("--a1", f_a1)->capture_default_str();
  dfo->add_option("--a2", f_a2)->capture_default_str();
  dfo->add_option("--ball", f_ball)->capture_default_str();
  dfo->add_option("--delta", f_delta)->capture_default_str();
  dfo->callback([&] {
    action = [&] {
      run.command = "distance fold";
      run.inputs["a1"] = f_a1;
      run.inputs["a2"] = f_a2;
      run.inputs["ball"] = f_ball;
      run.inputs["delta"] = f_delta;
      const FoldingBounds f = folding_bounds(f_a1, f_a2, f_ball, f_delta);
      run.add("fold.json", dump_json({{"inclusion", f.inclusion}, {"folding", f.folding}}));
      run.summary << "inclusion " << fmt17(f.inclusion) << "\nfolding " << fmt17(f.folding) << "\n";
    };
  });

  SweepTolerances ds_tol;
  auto* ds = distance->add_subcommand("sandwich", "d_inf <= lower <= upper <= 2 d_inf for one pair");
  pair_opts(ds);
  ds->add_option("--lower-tol", ds_tol.lower_tol)->check(CLI::PositiveNumber);
  ds->add_option("--upper-tol", ds_tol.upper_tol)->check(CLI::PositiveNumber);
  ds->callback([&] {
    action = [&] {
      run.command = "distance sandwich";
      record_pair();
      run.tolerances["lower_tol"] = ds_tol.lower_tol;
      run.tolerances["upper_tol"] = ds_tol.upper_tol;
      const FamilyModel model;
      const SweepReport rep = bilipschitz_sweep(model, {{d_a1, d_b1}, {d_a2, d_b2}}, ds_tol, 1, d_opt);
      const SweepRow& r = rep.rows.front();
      run.add("sandwich.json", dump_json({{"dinf", r.dinf},
                                          {"lower", r.lower},
                                          {"upper", r.upper},
                                          {"slack", r.slack},
                                          {"pass", r.pass},
                                          {"failure", r.failure}}));
      run.pass = r.pass;
      run.summary << "dinf " << fmt17(r.dinf) << "\nlower " << fmt17(r.lower) << "\nupper " << fmt17(r.upper)
                  << "\n";
      if (!r.pass) run.summary << "failure: " << r.failure << "\n";
    };
  });

  // persist
  auto* persist = app.add_subcommand("persist", "filtered DG-algebra persistence");
  persist->require_subcommand(1);
  std::string p_in;
  bool p_oracle = false;
  auto* pbar = persist->add_subcommand("barcode", "barcode of a DGA");
  pbar->add_option("--in", p_in, "DGA JSON file")->required();
  pbar->add_flag("--oracle", p_oracle, "also compare against the brute-force oracle");
  pbar->callback([&] {
    action = [&] {
      run.command = "persist barcode";
      run.inputs["in"] = std::filesystem::path(p_in).filename().string();
      run.inputs["oracle"] = p_oracle;
      const FilteredDGA dga = parse_dga(read_json_file(p_in, "--in", run));
      if (!d_squared_check(dga)) throw InputError("differential: d^2 does not vanish");
      const Barcode bc = barcode(dga);
      run.add("barcode.csv", barcode_csv(bc));
      const auto l = unit_vanishing_level(dga);
      json j = {{"bars", bars_json(bc)},
                {"basis_size", bc.basis.size()},
                {"unit_vanishing_level", l ? json(rat_str(*l)) : json("inf")}};
      if (p_oracle) {
        const bool match = brute_force_oracle(dga).bars == bc.bars;
        j["oracle_match"] = match;
        run.pass = match;
      }
      run.add("barcode.json", dump_json(j));
      run.summary << bc.bars.size() << " bars\n";
    };
  });

  auto* pch = persist->add_subcommand("check", "d^2, filtration, oracle, Leibniz and longest-bar checks");
  pch->add_option("--in", p_in, "DGA JSON file")->required();
  pch->callback([&] {
    action = [&] {
      run.command = "persist check";
      run.inputs["in"] = std::filesystem::path(p_in).filename().string();
      const FilteredDGA dga = parse_dga(read_json_file(p_in, "--in", run));
      json j;
      const bool d2 = d_squared_check(dga);
      j["d_squared"] = d2;
      if (d2) {
        bool filtration = true;
        for (const Monomial& m : dga.basis()) {
          const Element d = boundary(dga, m);
          if (!d.empty() && !(dga.action(d) < dga.action(m))) filtration = false;
        }
        const Barcode bc = barcode(dga);
        const bool oracle = brute_force_oracle(dga).bars == bc.bars;
        const auto l = unit_vanishing_level(dga);
        bool leibniz = true, longest = true;
        if (l) {
          mpq_class longest_len = 0;
          for (const Bar& b : bc.bars) {
            if (!b.death) continue;
            longest_len = std::max(longest_len, mpq_class(*b.death - b.birth));
            const Monomial& y = bc.basis[b.birth_index];
            if (boundary(dga, y).empty() && *b.death > leibniz_upper_bound(dga, y)) leibniz = false;
          }
          longest = longest_len == *l;
        }
        j["filtration"] = filtration;
        j["oracle_match"] = oracle;
        j["leibniz_bound"] = leibniz;
        j["longest_bar_is_unit"] = longest;
        j["unit_vanishing_level"] = l ? json(rat_str(*l)) : json("inf");
        run.pass = filtration && oracle && leibniz && longest;
      } else {
        run.pass = false;
      }
      run.add("check.json", dump_json(j));
      for (auto it = j.begin(); it != j.end(); ++it) run.summary << it.key() << " " << it.value().dump() << "\n";
    };
  });

  std::vector<std::string> argv_s;
  argv_s.push_back("lutzlab");
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_s) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitInput;
  }

  try {
    // The thread count stays out of the manifest so artifacts do not depend on it.
    action();
    return write_outputs(run, out_dir, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidGeometry& e) {
    err << "input error (InvalidGeometry): " << e.what() << "\n";
    return kExitInput;
  } catch (const PreconditionFailed& e) {
    err << "input error (PreconditionFailed): " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainViolation& e) {
    err << "input error (DomainViolation): " << e.what() << "\n";
    return kExitInput;
  } catch (const BasisOverflow& e) {
    err << "input error (BasisOverflow): " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "failure (" << e.kind() << "): " << e.what() << "\n";
    return kExitAssertion;
  }
}

}  // namespace lutzlab::cli
