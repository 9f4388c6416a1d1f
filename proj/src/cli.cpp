#include "qch/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qch/ch_inequality.hpp"
#include "qch/lhv_solver.hpp"
#include "qch/settings_optimizer.hpp"

namespace qch::cli {

using nlohmann::json;

namespace {

constexpr double kInvariantTolerance = 1e-10;
constexpr double kDecompositionTolerance = 1e-12;

// ---------------------------------------------------------------------------
// JSON output

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_json(const json& j, std::ostream& os, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        os << json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        write_json(it.value(), os, indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Short numeric rows stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i != 0) os << (flat ? ", " : ",");
        if (!flat) newline(depth + 1);
        write_json(j[i], os, indent, depth + 1);
      }
      if (!flat) newline(depth);
      os << ']';
      return;
    }
    default:
      os << j.dump();
      return;
  }
}

// ---------------------------------------------------------------------------
// Settings parsing

PhaseVector parse_phase_vector(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw SettingsError(field + ": expected an array of 3 numbers");
  }
  PhaseVector v{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) {
      throw SettingsError(field + "[" + std::to_string(i) + "]: expected a number");
    }
    v[i] = j[i].get<double>();
    if (!std::isfinite(v[i])) {
      throw SettingsError(field + "[" + std::to_string(i) + "]: must be finite");
    }
  }
  return v;
}

std::array<PhaseVector, 2> parse_party(const json& doc, const std::string& field) {
  if (!doc.contains(field)) throw SettingsError(field + ": missing");
  const json& j = doc.at(field);
  if (!j.is_array() || j.size() != 2) {
    throw SettingsError(field + ": expected an array of 2 phase triples");
  }
  return {parse_phase_vector(j[0], field + "[0]"), parse_phase_vector(j[1], field + "[1]")};
}

Permutation parse_permutation(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw SettingsError(field + ": expected an array of 3 integers");
  }
  std::array<int, 3> images{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer()) {
      throw SettingsError(field + "[" + std::to_string(i) + "]: expected an integer");
    }
    images[i] = j[i].get<int>();
  }
  try {
    return Permutation::from_images(images);
  } catch (const std::invalid_argument&) {
    throw SettingsError(field + ": not a permutation of 1,2,3");
  }
}

constexpr std::array<const char*, 4> kRelabelKeys{"a1", "a2", "b1", "b2"};

// ---------------------------------------------------------------------------
// Reports

json table_to_json(const ProbabilityTable& t) {
  json rows = json::array();
  for (const auto& row : t.p) rows.push_back(json::array({row[0], row[1], row[2]}));
  return rows;
}

json experiment_to_json(const ExperimentProbabilities& exp) {
  json tables = json::object();
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l)
      tables[std::to_string(k) + std::to_string(l)] = table_to_json(exp.table(k, l));
  json alice = json::array();
  json bob = json::array();
  for (int s = 0; s < 2; ++s) {
    alice.push_back(json::array({exp.alice_singles[s][0], exp.alice_singles[s][1], exp.alice_singles[s][2]}));
    bob.push_back(json::array({exp.bob_singles[s][0], exp.bob_singles[s][1], exp.bob_singles[s][2]}));
  }
  return {{"tables", tables}, {"alice_singles", alice}, {"bob_singles", bob}};
}

struct LoadedSettings {
  PhaseSettings settings;
  std::string digest;
};

LoadedSettings load_settings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SettingsError("settings: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return {parse_settings(text), "fnv1a64:" + fnv1a64_hex(text)};
}

class Report {
 public:
  Report(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["argv"] = args;
    doc_["input_digest"] = nullptr;
    doc_["results"] = json::object();
    doc_["tolerances"] = json::object();
  }

  json& results() { return doc_["results"]; }
  json& tolerances() { return doc_["tolerances"]; }
  void set_digest(const std::string& digest) { doc_["input_digest"] = digest; }

  void emit(std::ostream& out) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    doc_["wall_time_seconds"] = elapsed.count();
    out << dump_json(doc_) << '\n';
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Check> appendix_checks(json& census_out) {
  std::vector<Check> checks;
  const ChCoefficients coeffs = ch_coefficients();

  bool nonpositive = true;
  bool values_ok = true;
  int n0 = 0, n1 = 0, n2 = 0;
  for (double v : coeffs.c) {
    nonpositive = nonpositive && v <= 0.0;
    if (v == 0.0) ++n0;
    else if (v == -1.0) ++n1;
    else if (v == -2.0) ++n2;
    else values_ok = false;
  }
  census_out = {{"zero", n0}, {"minus_one", n1}, {"minus_two", n2}};
  checks.push_back({"non-positivity", nonpositive, "every coefficient <= 0"});
  checks.push_back({"coefficient-values", values_ok, "coefficients lie in {0, -1, -2}"});
  checks.push_back({"coefficient-sum", coeffs.sum() == -54.0,
                    "sum of coefficients = " + format_double(coeffs.sum()) + " (expected -54)"});
  checks.push_back({"census-balance", n1 + 2 * n2 == 54 && n0 + n1 + n2 == 81,
                    "n1 + 2 n2 = 54 and n0 + n1 + n2 = 81"});

  bool routes_agree = true;
  double max_det = -1e300;
  for (const JointAtom& atom : all_atoms()) {
    const double direct = ch_lhs(deterministic_experiment(atom));
    routes_agree = routes_agree && direct == coeffs[atom];
    max_det = std::max(max_det, deterministic_value(atom));
  }
  checks.push_back({"census-oracle", routes_agree,
                    "term expansion equals the inequality evaluated on each deterministic strategy"});

  const AppendixDecomposition d = appendix_decomposition();
  const ChCoefficients sum = d.ch1 + d.ch2 + d.g;
  double worst = 0.0;
  for (std::size_t i = 0; i < kAtomCount; ++i) worst = std::max(worst, std::abs(sum.c[i] - coeffs.c[i]));
  checks.push_back({"decomposition-identity", worst <= kDecompositionTolerance,
                    "max |CH1 + CH2 + G - full| = " + format_double(worst)});
  checks.push_back({"ch1-ch2-nonpositive", d.ch1.max() <= 0.0 && d.ch2.max() <= 0.0,
                    "CH1 and CH2 are each <= 0 on every atom"});
  checks.push_back({"deterministic-max", max_det == 0.0,
                    "max over deterministic strategies = " + format_double(max_det)});
  return checks;
}

double require_noise(double noise) {
  return NoiseParameter(noise).fraction();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string dump_json(const json& doc, int indent) {
  std::ostringstream os;
  write_json(doc, os, indent, 0);
  return os.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PhaseSettings parse_settings(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SettingsError(std::string("settings: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SettingsError("settings: expected a JSON object");

  PhaseSettings s;
  s.alice = parse_party(doc, "alice");
  s.bob = parse_party(doc, "bob");
  if (doc.contains("relabel") && !doc.at("relabel").is_null()) {
    const json& r = doc.at("relabel");
    if (!r.is_object()) throw SettingsError("relabel: expected an object");
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (std::find(kRelabelKeys.begin(), kRelabelKeys.end(), it.key()) == kRelabelKeys.end()) {
        throw SettingsError("relabel." + it.key() + ": unknown key");
      }
    }
    for (std::size_t i = 0; i < kRelabelKeys.size(); ++i) {
      const std::string key = kRelabelKeys[i];
      if (r.contains(key)) s.relabel.perms[i] = parse_permutation(r.at(key), "relabel." + key);
    }
  }
  return s;
}

json settings_to_json(const PhaseSettings& s) {
  const auto triple = [](const PhaseVector& v) { return json::array({v[0], v[1], v[2]}); };
  json relabel = json::object();
  for (std::size_t i = 0; i < kRelabelKeys.size(); ++i) {
    const auto& im = s.relabel.perms[i].images();
    relabel[kRelabelKeys[i]] = json::array({im[0], im[1], im[2]});
  }
  return {{"alice", json::array({triple(s.alice[0]), triple(s.alice[1])})},
          {"bob", json::array({triple(s.bob[0]), triple(s.bob[1])})},
          {"relabel", relabel}};
}

std::string format_settings(const PhaseSettings& settings) {
  return dump_json(settings_to_json(settings));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Qutrit Clauser-Horne inequality toolkit"};
  app.require_subcommand(1);

  std::string settings_path;
  double noise = 0.0;
  std::string method_text = "lp";
  bool csv = false;
  std::string output_path;
  std::size_t restarts = 20;
  std::uint64_t seed = 7;
  unsigned threads = 0;

  auto* probs = app.add_subcommand("probs", "Joint tables and singles for a settings file");
  probs->add_option("--settings", settings_path, "Settings file")->required();
  probs->add_option("--noise", noise, "White-noise fraction F in [0, 1]");

  auto* ch = app.add_subcommand("ch", "Left-hand side of the CH inequality");
  ch->add_option("--settings", settings_path, "Settings file")->required();
  ch->add_option("--noise", noise, "White-noise fraction F in [0, 1]");

  auto* threshold = app.add_subcommand("threshold", "Noise threshold for violation");
  threshold->add_option("--settings", settings_path, "Settings file")->required();
  threshold->add_option("--method", method_text, "analytic or lp")
      ->check(CLI::IsMember({"analytic", "lp"}));

  auto* coeffs = app.add_subcommand("coeffs", "The 81 atom coefficients of the inequality");
  coeffs->add_flag("--csv", csv, "Emit CSV instead of JSON");

  auto* verify = app.add_subcommand("verify-appendix", "Mechanical check of the inequality's proof");

  auto* preset = app.add_subcommand("paper-preset", "Write the built-in reference settings file");
  preset->add_option("--output", output_path, "Destination (default: standard output)");

  auto* opt = app.add_subcommand("optimize", "Search phase settings for the largest threshold");
  opt->add_option("--restarts", restarts, "Number of random restarts")->check(CLI::PositiveNumber);
  opt->add_option("--seed", seed, "Random seed");
  opt->add_option("--method", method_text, "analytic or lp")->check(CLI::IsMember({"analytic", "lp"}));
  opt->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*preset) {
      const std::string text = format_settings(paper_preset()) + "\n";
      if (output_path.empty()) {
        out << text;
      } else {
        std::ofstream f(output_path, std::ios::binary);
        if (!f) {
          err << "error: cannot write '" << output_path << "'\n";
          return kUsageError;
        }
        f << text;
      }
      return kSuccess;
    }

    if (*coeffs && csv) {
      const ChCoefficients c = ch_coefficients();
      out << "a1,a2,b1,b2,coefficient\n";
      for (const JointAtom& atom : all_atoms()) {
        out << atom.a1 << ',' << atom.a2 << ',' << atom.b1 << ',' << atom.b2 << ','
            << format_double(c[atom]) << '\n';
      }
      return kSuccess;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Report report(command, args);

    if (*probs || *ch) {
      const LoadedSettings loaded = load_settings(settings_path);
      report.set_digest(loaded.digest);
      const ExperimentProbabilities exp =
          experiment_probabilities(loaded.settings, NoiseParameter(require_noise(noise)));
      report.results()["noise"] = noise;
      if (*probs) {
        if (auto problem = exp.check_invariants(kInvariantTolerance)) {
          err << "error: computed probabilities violate an invariant: " << *problem << '\n';
          return kNumericalFailure;
        }
        report.results().update(experiment_to_json(exp));
        report.tolerances()["invariants"] = kInvariantTolerance;
      } else {
        const double lhs = ch_lhs(exp);
        report.results()["ch_lhs"] = lhs;
        report.results()["violated"] = lhs > 0.0;
      }
    } else if (*threshold) {
      const LoadedSettings loaded = load_settings(settings_path);
      report.set_digest(loaded.digest);
      const ThresholdMethod method = *parse_threshold_method(method_text);
      const ExperimentProbabilities exp0 = experiment_probabilities(loaded.settings, NoiseParameter(0.0));
      report.results()["method"] = method_text;
      if (method == ThresholdMethod::Analytic) {
        const ThresholdEstimate est = analytic_threshold(exp0);
        report.results()["threshold"] = est.value;
        report.results()["violated"] = est.violated;
        report.results()["degenerate"] = est.degenerate;
        report.results()["ch_lhs_at_0"] = est.lhs_pure;
        report.results()["ch_lhs_at_1"] = est.lhs_noise;
      } else {
        const LhvOptions options;
        const LpOutcome lp = min_noise_lp(exp0, options);
        if (!lp.f_min) {
          err << "error: threshold LP failed (" << to_string(lp.status) << ")\n";
          return kNumericalFailure;
        }
        report.results()["threshold"] = *lp.f_min;
        report.results()["status"] = to_string(lp.status);
        report.results()["solver"] = to_string(lp.method);
        report.results()["simplex_iterations"] = lp.iterations;
        report.tolerances()["phase1_infeasibility"] = options.tolerance;
        report.tolerances()["certificate"] = options.certificate_tolerance;
      }
    } else if (*coeffs) {
      const ChCoefficients c = ch_coefficients();
      json rows = json::array();
      for (const JointAtom& atom : all_atoms()) {
        rows.push_back(json::array({atom.a1, atom.a2, atom.b1, atom.b2, c[atom]}));
      }
      report.results()["order"] = "a1,a2,b1,b2 odometer, a1 fastest";
      report.results()["columns"] = json::array({"a1", "a2", "b1", "b2", "coefficient"});
      report.results()["coefficients"] = rows;
      report.results()["sum"] = c.sum();
    } else if (*verify) {
      json census;
      const std::vector<Check> checks = appendix_checks(census);
      json list = json::array();
      bool all_pass = true;
      for (const Check& c : checks) {
        all_pass = all_pass && c.pass;
        list.push_back({{"name", c.name}, {"result", c.pass ? "pass" : "fail"}, {"detail", c.detail}});
      }
      report.results()["checks"] = list;
      report.results()["census"] = census;
      report.results()["all_pass"] = all_pass;
      report.tolerances()["decomposition"] = kDecompositionTolerance;
      report.emit(out);
      return all_pass ? kSuccess : kVerificationFailure;
    } else if (*opt) {
      const ThresholdMethod method = *parse_threshold_method(method_text);
      OptimizerOptions options;
      options.threads = threads;
      const OptimizationResult r = optimize(restarts, seed, method, options);
      report.results()["method"] = method_text;
      report.results()["restarts"] = restarts;
      report.results()["seed"] = seed;
      report.results()["best_threshold"] = r.best_threshold;
      report.results()["best_restart"] = r.best_restart;
      report.results()["best_settings"] = settings_to_json(r.best_settings);
      report.results()["evaluations"] = r.evaluations;
      report.results()["failed_restarts"] = r.failed_restarts;
      if (method == ThresholdMethod::Analytic) {
        report.results()["lp_threshold_of_best"] = threshold_objective(r.best_settings, ThresholdMethod::Lp);
      }
      report.tolerances()["coordinate"] = options.coordinate_tolerance;
      report.tolerances()["sweep_improvement"] = options.sweep_improvement;
    }

    report.emit(out);
    return kSuccess;
  } catch (const SettingsError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericalFailure& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace qch::cli
