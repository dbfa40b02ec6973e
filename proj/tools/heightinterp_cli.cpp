#include <CLI11.hpp>

#include <heightinterp/reduce.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "suites.hpp"

using namespace heightinterp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content << "\n";
  else
    write_file(path, content);
}

double to_double(const Rational& r) { return mpq_get_d(r.raw().get_mpq_t()); }

struct ProfileArgs {
  Int multiplier = 200;
  Int m_max = 5;

  void attach(CLI::App* cmd) {
    cmd->add_option_function<long>("--N", [this](long v) { multiplier = v; },
                                   "interpretation multiplier N");
    cmd->add_option_function<long>("--mmax", [this](long v) { m_max = v; },
                                   "largest natural the profile must decode");
  }

  Profile build() const { return build_profile(multiplier, m_max); }
};

/// Profile defaults from HEIGHTINTERP_PROFILE (a profile JSON or key=value
/// config file) and/or an explicit --config file.
void load_profile_defaults(ProfileArgs& args, const std::string& config_path) {
  auto apply_kv = [&args](const std::string& key, const std::string& value) {
    if (key == "N") args.multiplier = Int(value);
    if (key == "mmax" || key == "m_max") args.m_max = Int(value);
  };
  auto load = [&](const std::string& path) {
    std::string text = read_file(path);
    if (!text.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos &&
        text[text.find_first_not_of(" \t\r\n")] == '{') {
      nlohmann::json j = nlohmann::json::parse(text);
      if (j.contains("N")) args.multiplier = Int(j["N"].get<std::string>());
      if (j.contains("m_max")) args.m_max = Int(j["m_max"].get<std::string>());
      return;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      apply_kv(key, value);
    }
  };
  if (const char* env = std::getenv("HEIGHTINTERP_PROFILE"); env && *env) load(env);
  if (!config_path.empty()) load(config_path);
}

std::vector<Rational> parse_rationals(const std::vector<std::string>& texts) {
  std::vector<Rational> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Rational::from_string(t));
  return out;
}

int report_bool(bool verdict, bool json) {
  if (json)
    std::cout << (verdict ? "{\"verdict\":true}" : "{\"verdict\":false}") << "\n";
  else
    std::cout << (verdict ? "true" : "false") << "\n";
  return verdict ? 0 : 1;
}

int run_suites(const std::string& suite, long samples, const ProfileArgs& pa, bool json) {
  std::vector<suites::SuiteResult> results;
  auto append = [&results](std::vector<suites::SuiteResult> rs) {
    results.insert(results.end(), rs.begin(), rs.end());
  };
  if (suite == "heights" || suite == "all") append(suites::run_heights(samples));
  if (suite == "curve" || suite == "all") append(suites::run_curve(12));
  if (suite == "gadgets" || suite == "all") append(suites::run_gadgets(samples / 10 + 10));
  if (suite == "interp" || suite == "all") append(suites::run_interp(pa.multiplier, pa.m_max));
  if (suite == "reduce" || suite == "all") append(suites::run_reduce(pa.multiplier, pa.m_max));
  if (results.empty()) {
    std::cerr << "unknown suite \"" << suite
              << "\" (expected heights|curve|gadgets|interp|reduce|all)\n";
    return 2;
  }
  bool all_ok = true;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results) {
    all_ok = all_ok && r.passed;
    if (json) {
      j.push_back({{"name", r.name}, {"passed", r.passed}, {"checks", r.checks},
                   {"detail", r.detail}});
    } else {
      std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.checks
                << " checks)" << (r.detail.empty() ? "" : "  " + r.detail) << "\n";
    }
  }
  if (json) std::cout << j.dump(2) << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact heights, the y^2 = x^3 + 2 interpretation ladder, and the"
               " N-to-Q sentence compiler"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable JSON output");
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file (N, mmax)");

  // height h|H|E|S
  auto* height = app.add_subcommand("height", "exact height computations and comparisons");
  std::string height_op;
  std::vector<std::string> height_args;
  height->add_option("op", height_op, "h | H | E | S | product")->required();
  height->add_option("args", height_args, "rationals; for H/E separate tuples with --");

  auto* curve = app.add_subcommand("curve", "group law and canonical heights on y^2 = x^3 + 2");
  std::string curve_op;
  std::vector<std::string> curve_args;
  int curve_k = 12;
  int curve_range = 12;
  curve->add_option("op", curve_op, "mul | add | on | pi | hhat | gap")->required();
  curve->add_option("args", curve_args, "operation arguments");
  curve->add_option("--k", curve_k, "doubling stages for hhat");
  curve->add_option("--range", curve_range, "multiples to test for gap");

  auto* encode_cmd = app.add_subcommand("encode", "encode a natural as an X4 certificate");
  long encode_m = 0;
  std::string encode_out;
  ProfileArgs encode_pa;
  encode_cmd->add_option("m", encode_m, "natural number")->required();
  encode_cmd->add_option("-o,--out", encode_out, "output file (default stdout)");
  encode_pa.attach(encode_cmd);

  auto* decode_cmd = app.add_subcommand("decode", "decode a certificate or rational to a natural");
  std::string decode_file, decode_value;
  ProfileArgs decode_pa;
  decode_cmd->add_option("file", decode_file, "certificate JSON file");
  decode_cmd->add_option("--value", decode_value, "rational value a/b instead of a file");
  decode_pa.attach(decode_cmd);

  auto* profile_cmd = app.add_subcommand("profile", "build and print a validated profile");
  std::string profile_out;
  ProfileArgs profile_pa;
  profile_cmd->add_option("-o,--out", profile_out, "output file (default stdout)");
  profile_pa.attach(profile_cmd);

  auto* slack_cmd = app.add_subcommand("slack", "slack analysis of the definability chain");
  std::string slack_ce = "4";
  long slack_check_n = 0;
  slack_cmd->add_option("--cE", slack_ce, "curve constant c_E (default 4)");
  slack_cmd->add_option("--check-N", slack_check_n, "also check a multiplier against D_min");

  auto* compile_cmd = app.add_subcommand("compile", "compile an N-formula to an L_h sentence");
  std::string compile_in, compile_out, compile_sentence_out;
  ProfileArgs compile_pa;
  compile_cmd->add_option("formula", compile_in, "N-formula file (S-expression)")->required();
  compile_cmd->add_option("-o,--out", compile_out, "bundle JSON output (default stdout)");
  compile_cmd->add_option("--sentence-out", compile_sentence_out, "also write the bare sentence");
  compile_pa.attach(compile_cmd);

  auto* check_cmd = app.add_subcommand("check", "check a witness against a sentence");
  std::string check_sentence, check_witness_path;
  check_cmd->add_option("sentence", check_sentence, "sentence file (.sexp or bundle .json)")
      ->required();
  check_cmd->add_option("witness", check_witness_path, "witness JSON file")->required();

  auto* up_cmd = app.add_subcommand("witness-up", "translate an N-assignment to a Q-witness");
  std::string up_formula, up_assign, up_out;
  ProfileArgs up_pa;
  up_cmd->add_option("formula", up_formula, "N-formula file")->required();
  up_cmd->add_option("assignment", up_assign, "N-assignment JSON file")->required();
  up_cmd->add_option("-o,--out", up_out, "witness output (default stdout)");
  up_pa.attach(up_cmd);

  auto* down_cmd = app.add_subcommand("witness-down", "decode a Q-witness to an N-assignment");
  std::string down_witness, down_bundle, down_out;
  ProfileArgs down_pa;
  down_cmd->add_option("witness", down_witness, "witness JSON file")->required();
  down_cmd->add_option("bundle", down_bundle, "compile bundle JSON file")->required();
  down_cmd->add_option("-o,--out", down_out, "assignment output (default stdout)");
  down_pa.attach(down_cmd);

  auto* gadgets_cmd = app.add_subcommand("gadgets", "dump the gadget catalog as formulas");
  int gadgets_m = 2;
  bool gadgets_interp = false;
  ProfileArgs gadgets_pa;
  gadgets_pa.multiplier = 30;
  gadgets_pa.m_max = 5;
  gadgets_cmd->add_option("--M", gadgets_m, "chain size for A^M / E^M (default 2)");
  gadgets_cmd->add_flag("--interpretation", gadgets_interp,
                        "include the profile-dependent membership and relation gadgets");
  gadgets_pa.attach(gadgets_cmd);

  auto* verify_cmd = app.add_subcommand("verify-lemmas", "run the lemma verification suites");
  std::string verify_suite = "all";
  long verify_samples = 200;
  ProfileArgs verify_pa;
  verify_pa.multiplier = 30;
  verify_pa.m_max = 20;
  verify_cmd->add_option("--suite", verify_suite, "heights|curve|gadgets|interp|reduce|all");
  verify_cmd->add_option("--samples", verify_samples, "sample count for property suites");
  verify_pa.attach(verify_cmd);

  // CLI11 swallows a bare "--"; map it to the equivalent "/" separator so the
  // documented `height H <xs...> -- <ys...>` form works.
  std::vector<std::string> raw_args(argv + 1, argv + argc);
  for (auto& a : raw_args)
    if (a == "--") a = "/";
  std::vector<const char*> argv2;
  argv2.push_back(argv[0]);
  for (const auto& a : raw_args) argv2.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv2.size()), argv2.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*height) {
      if (height_op == "h") {
        auto tuple = parse_rationals(height_args);
        if (tuple.empty()) throw Error("height h: needs at least one rational");
        Int value = mult_height(tuple).value;
        if (json)
          std::cout << "{\"mult_height\":\"" << value.get_str() << "\"}\n";
        else
          std::cout << value.get_str() << "\n";
        return 0;
      }
      if (height_op == "H" || height_op == "E") {
        auto split = std::find(height_args.begin(), height_args.end(), "--");
        // CLI11 may eat the "--" separator; a lone "/" also splits.
        if (split == height_args.end())
          split = std::find(height_args.begin(), height_args.end(), "/");
        if (split == height_args.end())
          throw Error("height " + height_op + ": separate the tuples with -- (or /)");
        auto xs = parse_rationals({height_args.begin(), split});
        auto ys = parse_rationals({split + 1, height_args.end()});
        bool v = height_op == "H" ? holds_H(xs, ys) : holds_E(xs, ys);
        return report_bool(v, json);
      }
      if (height_op == "S") {
        auto t = parse_rationals(height_args);
        if (t.size() != 3) throw Error("height S: needs exactly three rationals");
        return report_bool(holds_S(t[0], t[1], t[2]), json);
      }
      if (height_op == "product") {
        auto t = parse_rationals(height_args);
        if (t.size() != 1) throw Error("height product: needs exactly one rational");
        return report_bool(product_formula_check(t[0]), json);
      }
      throw Error("unknown height operation \"" + height_op + "\"");
    }

    if (*curve) {
      if (curve_op == "mul") {
        if (curve_args.empty()) throw Error("curve mul: needs a multiplier");
        Int n(curve_args[0]);
        Point base = curve_args.size() > 1 ? Point::from_string(curve_args[1]) : generator();
        std::cout << scalar_mul(n, base).str() << "\n";
        return 0;
      }
      if (curve_op == "add") {
        if (curve_args.size() != 2) throw Error("curve add: needs two points");
        std::cout << add(Point::from_string(curve_args[0]), Point::from_string(curve_args[1])).str()
                  << "\n";
        return 0;
      }
      if (curve_op == "on") {
        if (curve_args.size() != 1) throw Error("curve on: needs one point");
        return report_bool(on_curve(Point::from_string(curve_args[0])), json);
      }
      if (curve_op == "pi") {
        if (curve_args.size() != 1) throw Error("curve pi: needs one point");
        std::cout << pi(Point::from_string(curve_args[0])).str() << "\n";
        return 0;
      }
      if (curve_op == "hhat") {
        Point base = curve_args.empty() ? generator() : Point::from_string(curve_args[0]);
        CertifiedReal h = canonical_height(base, curve_k);
        if (json) {
          nlohmann::json j{{"lo", h.lo.str()}, {"hi", h.hi.str()},
                           {"lo_decimal", to_double(h.lo)}, {"hi_decimal", to_double(h.hi)}};
          std::cout << j.dump() << "\n";
        } else {
          std::cout << "hhat in [" << to_double(h.lo) << ", " << to_double(h.hi)
                    << "]  (width " << to_double(h.width()) << ")\n";
        }
        return 0;
      }
      if (curve_op == "gap") {
        const CurveConstants& cc = CurveConstants::get();
        CertifiedReal hh = canonical_height(generator(), std::max(curve_k, 10));
        bool all_inside = true;
        for (int k = 1; k <= curve_range; ++k) {
          CertifiedReal gap = hh.scaled(Rational(k) * Rational(k)) -
                              log_height(naive_height(scalar_mul(k, generator())),
                                         Rational(1, 1000000));
          bool inside = gap.lo > cc.gap_lower && gap.hi < cc.gap_upper;
          all_inside = all_inside && inside;
          if (!json)
            std::cout << "k=" << k << "  gap in [" << to_double(gap.lo) << ", "
                      << to_double(gap.hi) << "]  " << (inside ? "inside" : "OUTSIDE") << "\n";
        }
        return report_bool(all_inside, json);
      }
      throw Error("unknown curve operation \"" + curve_op + "\"");
    }

    if (*encode_cmd) {
      load_profile_defaults(encode_pa, config_path);
      Profile p = encode_pa.build();
      emit(encode_out, encode(encode_m, p).to_json(true));
      return 0;
    }

    if (*decode_cmd) {
      load_profile_defaults(decode_pa, config_path);
      Profile p = decode_pa.build();
      Rational q;
      if (!decode_value.empty()) {
        q = Rational::from_string(decode_value);
      } else if (!decode_file.empty()) {
        q = X4Certificate::from_json(read_file(decode_file)).q;
      } else {
        throw Error("decode: needs a certificate file or --value");
      }
      Int m = decode(q, p);
      if (json)
        std::cout << "{\"m\":\"" << m.get_str() << "\"}\n";
      else
        std::cout << m.get_str() << "\n";
      return 0;
    }

    if (*profile_cmd) {
      load_profile_defaults(profile_pa, config_path);
      emit(profile_out, profile_pa.build().to_json(true));
      return 0;
    }

    if (*slack_cmd) {
      SlackReport report = slack_analysis(Rational::from_string(slack_ce));
      if (json) {
        std::cout << report.to_json(true) << "\n";
      } else {
        std::cout << "constraint                 intermediate   requires D >\n";
        for (const auto& c : report.constraints)
          std::cout << c.name << std::string(c.name.size() < 26 ? 26 - c.name.size() : 1, ' ')
                    << c.intermediate.str() << std::string(15 - std::min<size_t>(14, c.intermediate.str().size()), ' ')
                    << c.d_lower_bound.str() << "\n";
        std::cout << "D_min = " << report.d_min.str() << ", B_dec = " << report.b_dec.str()
                  << "\n";
      }
      if (slack_check_n > 0) {
        try {
          Profile p = build_profile(slack_check_n, 1);
          std::cout << "N=" << slack_check_n << " accepted (D > " << report.d_min.str()
                    << ")\n";
          (void)p;
          return 0;
        } catch (const ProfileError& e) {
          std::cout << "N=" << slack_check_n << " rejected: " << e.what() << "\n";
          return 1;
        }
      }
      return 0;
    }

    if (*compile_cmd) {
      load_profile_defaults(compile_pa, config_path);
      Profile p = compile_pa.build();
      CompileOutput out = compile(parse_nat_formula(read_file(compile_in)), p);
      emit(compile_out, out.to_json(true));
      if (!compile_sentence_out.empty()) write_file(compile_sentence_out, render(out.sentence));
      return 0;
    }

    if (*check_cmd) {
      std::string text = read_file(check_sentence);
      std::string sentence_text = text;
      auto first = text.find_first_not_of(" \t\r\n");
      if (first != std::string::npos && text[first] == '{')
        sentence_text = nlohmann::json::parse(text).at("sentence").get<std::string>();
      Formula sentence = parse_formula(sentence_text);
      Assignment w = Assignment::from_json(read_file(check_witness_path));
      bool ok = check_witness(sentence, w);
      std::cout << (ok ? "accept" : "reject") << "\n";
      return ok ? 0 : 1;
    }

    if (*up_cmd) {
      load_profile_defaults(up_pa, config_path);
      Profile p = up_pa.build();
      CompileOutput out = compile(parse_nat_formula(read_file(up_formula)), p);
      nlohmann::json aj = nlohmann::json::parse(read_file(up_assign));
      NatAssignment a;
      for (auto it = aj.begin(); it != aj.end(); ++it)
        a[it.key()] = it.value().is_string() ? Int(it.value().get<std::string>())
                                             : Int(std::to_string(it.value().get<long long>()));
      Assignment w = witness_up(out, a, p);
      emit(up_out, w.to_json(true));
      return 0;
    }

    if (*down_cmd) {
      load_profile_defaults(down_pa, config_path);
      Profile p = down_pa.build();
      nlohmann::json bundle = nlohmann::json::parse(read_file(down_bundle));
      CompileOutput out = compile(parse_nat_formula(bundle.at("source").get<std::string>()), p);
      Assignment w = Assignment::from_json(read_file(down_witness));
      NatAssignment a = witness_down(w, out, p);
      nlohmann::json aj = nlohmann::json::object();
      for (const auto& [k, v] : a) aj[k] = v.get_str();
      emit(down_out, aj.dump(2));
      return 0;
    }

    if (*gadgets_cmd) {
      std::vector<std::pair<std::string, GadgetInstance>> catalog = {
          {"J", gadget_J()},
          {"A", gadget_A()},
          {"A^" + std::to_string(gadgets_m), gadget_AM(gadgets_m)},
          {"E^" + std::to_string(gadgets_m), gadget_EM(gadgets_m)},
          {"L", gadget_L()},
      };
      if (gadgets_interp) {
        load_profile_defaults(gadgets_pa, config_path);
        Profile p = gadgets_pa.build();
        catalog.emplace_back("X", gadget_X(p));
        catalog.emplace_back("X4", gadget_Xn(4, p));
        catalog.emplace_back("zero", gadget_zero(p));
        catalog.emplace_back("one", gadget_one(p));
        catalog.emplace_back("eq", gadget_eq(p));
        catalog.emplace_back("add", gadget_add(p));
        catalog.emplace_back("B", gadget_B(p));
      }
      nlohmann::json jout = nlohmann::json::array();
      for (const auto& [name, g] : catalog) {
        std::string iface;
        for (const auto& v : g.interface_vars) iface += (iface.empty() ? "" : " ") + v;
        if (json) {
          jout.push_back({{"name", name},
                          {"interface", g.interface_vars},
                          {"sound_bound", g.guarantee.sound_bound.str()},
                          {"complete_bound", g.guarantee.complete_bound.str()},
                          {"formula", render(g.formula)}});
        } else {
          std::cout << name << " (" << iface << ")  sound<=" << g.guarantee.sound_bound.str()
                    << " complete<=" << g.guarantee.complete_bound.str() << "\n  "
                    << render(g.formula) << "\n";
        }
      }
      if (json) std::cout << jout.dump(2) << "\n";
      return 0;
    }

    if (*verify_cmd) {
      load_profile_defaults(verify_pa, config_path);
      return run_suites(verify_suite, verify_samples, verify_pa, json);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
