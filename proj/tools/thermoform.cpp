#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "thermoform/runner.hpp"

using namespace thermoform;

namespace {

struct flag_def {
  const char* flag;
  const char* key;  // manifest key, or @prefix for a spec merged under that prefix
  const char* help;
};

struct command_def {
  const char* name;
  const char* help;
  std::vector<flag_def> flags;
  const char* csv;
};

// Accepted spec forms: path to a key = value or JSON file, inline "k=v;k=v", or a
// shortcut name (zero, coin, a builtin formula, a system or observable name).
void merge_spec(Manifest& m, const std::string& prefix, const std::string& value) {
  auto put = [&](std::string key, const std::string& v, int line) {
    if (key.rfind(prefix + ".", 0) != 0) key = prefix + "." + key;
    m.set(key, v, line);
  };
  if (std::filesystem::is_regular_file(value)) {
    std::ifstream f(value);
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      auto sub = parse_manifest_json("{\"" + prefix + "\": " + text + "}");
      for (auto& [k, v] : sub.values()) m.set(k, v);
      return;
    }
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      auto s = detail::trim(line);
      if (s.empty() || s[0] == '#') continue;
      auto eq = s.find('=');
      if (eq == std::string::npos) throw input_error(value + ": line " + std::to_string(no) + ": expected key = value");
      put(detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)), no);
    }
    return;
  }
  if (value.find('=') != std::string::npos) {
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ';')) {
      auto eq = part.find('=');
      if (eq == std::string::npos) throw input_error("bad spec fragment '" + part + "'");
      put(detail::trim(part.substr(0, eq)), detail::trim(part.substr(eq + 1)), 0);
    }
    return;
  }
  if (prefix == "system") return m.set("system.name", value);
  if (prefix == "eta" || prefix == "eta2") return m.set(prefix + ".name", value);
  if (value == "zero") return m.set(prefix + ".kind", "zero");
  if (value == "coin") {
    m.set(prefix + ".kind", "first_symbol");
    return m.set(prefix + ".table", "[1, -1]");
  }
  m.set(prefix + ".kind", "formula");
  m.set(prefix + ".formula", value);
}

const std::vector<command_def>& commands() {
  static const std::vector<flag_def> thermo = {{"--d", "d", "alphabet size"},
                                               {"--depth", "depth", "operator depth k"},
                                               {"--potential", "@potential", "potential spec"},
                                               {"--observable", "@observable", "observable spec (default: the potential)"},
                                               {"--tol", "tol", "power iteration tolerance"}};
  auto with = [](std::vector<flag_def> a, std::vector<flag_def> b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  static const std::vector<command_def> v = {
      {"pressure", "Pressure, entropy, mean and sigma^2 of a potential", thermo, ""},
      {"gibbs", "Gibbs cylinder measures", with(thermo, {{"--word", "word", "cylinder word, e.g. 1,2,1"}}),
       "word,measure"},
      {"sigma2", "Asymptotic variance of an observable", thermo, ""},
      {"ldrate", "Large deviation rate from the tilted pressure",
       with(thermo, {{"--t", "t", "tilt values, e.g. -1,1"}}), "t,rate,tilt_mean,pressure_tilted"},
      {"code",
       "Coding map point and tail bound; surjectivity coverage with --grid",
       {{"--system", "@system", "system spec"},
        {"--word", "word", "symbols"},
        {"--depth", "depth", "coding depth n"},
        {"--grid", "grid", "coverage grid size"},
        {"--seed", "seed", "grid seed"}},
       "grid_point,nearest_word,distance"},
      {"cover",
       "Pullback covers and the expansion check",
       {{"--system", "@system", "system spec"},
        {"--points", "points", "sample size"},
        {"--levels", "levels", "pullback levels"},
        {"--input", "cover.input", "JSON document {points: [[x, y]..], cover: [[i..]..]}"},
        {"--seed", "seed", "sample seed"}},
       "level,elements,max_diam_rho"},
      {"frink",
       "Frink metric from the pullback covers",
       {{"--system", "@system", "system spec"},
        {"--points", "points", "sample size"},
        {"--levels", "levels", "pullback levels"},
        {"--input", "cover.input", "JSON cover document"},
        {"--M", "M", "block length (0 chooses)"},
        {"--seed", "seed", "sample seed"}},
       "level,max_diam_rho,max_diam_frink,pass"},
      {"blowup",
       "Blow-up of a periodic critical point: chain metric certificate and Frink check",
       {{"--lambda", "blowup.lambda", "radial expansion"},
        {"--dloc", "blowup.dloc", "local degree"},
        {"--c", "blowup.c", "copy weight (default chosen from the model)"},
        {"--levels", "levels", "cover levels"},
        {"--M", "M", "Frink block length"},
        {"--ambient-degree", "blowup.ambient_degree", "ambient degree (0: dloc)"},
        {"--n-trunc", "blowup.n_trunc", "grand-orbit truncation"},
        {"--k0", "blowup.k0", "outer radius exponent"}},
       "level,max_diam_rho_tilde,max_diam_frink"},
      {"cohom",
       "Periodic-orbit obstruction for the cohomological equation",
       {{"--system", "@system", "system spec"},
        {"--eta", "@eta", "observable spec"},
        {"--eta2", "@eta2", "second observable for the cohomologous test"},
        {"--kmax", "kmax", "largest period"},
        {"--tol", "tol", "residual tolerance"}},
       ""},
      {"statlab",
       "Monte Carlo checks of CLT, LIL, EDC and LD",
       {{"--law", "law", "clt, lil, edc or ld"},
        {"--system", "@system", "push forward through the coding of this system"},
        {"--potential", "@potential", "potential spec"},
        {"--observable", "@observable", "observable spec"},
        {"--observable2", "@observable2", "second EDC observable"},
        {"--eta", "@eta", "observable on X for pushforward runs"},
        {"--n", "n", "Birkhoff length"},
        {"--N", "N", "sample count"},
        {"--n-max", "n_max", "LIL horizon"},
        {"--lags", "lags", "EDC lags"},
        {"--t", "t", "LD tilts"},
        {"--mode", "mode", "LD estimator: auto, direct or importance"},
        {"--seed", "seed", "random seed"},
        {"--depth", "depth", "operator depth"},
        {"--d", "d", "alphabet size"},
        {"--ks-tol", "ks_tol", "CLT threshold"}},
       "clt: sample,normalized_sum; lil: sample,max_lil_ratio; edc: lag,exact,empirical,error_bar; "
       "ld: t,threshold,rate,empirical,probability,mode"},
      {"selftest", "Quick internal consistency checks", {}, ""},
  };
  return v;
}

std::string timestamp() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int emit(const run_result& r, const Manifest& m) {
  std::string out = m.str("output"), csv = m.str("csv");
  std::string json = r.report.dump(2) + "\n";
  if (csv == "-")
    std::cout << r.csv;
  else
    std::cout << json;
  if (!out.empty()) {
    std::ofstream(out) << json;
    std::ofstream(out + ".log") << timestamp() << " " << m.str("operation") << " exit " << r.exit_code << "\n";
  }
  if (!csv.empty() && csv != "-" && !r.csv.empty()) std::ofstream(csv) << r.csv;
  if (r.report.contains("error")) std::cerr << "error: " << r.report["error"].get<std::string>() << "\n";
  return r.exit_code;
}

int input_failure(const std::string& msg) {
  ojson j;
  j["error"] = msg;
  std::cout << j.dump(2) << "\n";
  std::cerr << "error: " << msg << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermodynamic formalism toolkit"};
  app.require_subcommand(1);
  app.footer("Env THERMOFORM_THREADS caps parallelism. JSON goes to stdout; --csv - prints the CSV instead.");

  std::map<std::string, std::map<std::string, std::string>> given;
  std::string manifest_path;
  for (auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, c.help);
    auto& store = given[c.name];
    for (auto& f : c.flags) sub->add_option(f.flag, store[f.key], f.help);
    sub->add_option("--output", store["output"], "write the JSON report here (and a timestamp log next to it)");
    sub->add_option("--csv", store["csv"], "write the CSV here; '-' prints it to stdout");
    if (*c.csv) sub->footer(std::string("CSV columns: ") + c.csv);
  }
  auto* run_cmd = app.add_subcommand("run", "Run an experiment manifest (key = value or JSON)");
  run_cmd->add_option("--manifest", manifest_path, "manifest path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      auto m = load_manifest(manifest_path);
      return emit(run(m), m);
    }
    for (auto& c : commands()) {
      if (!app.got_subcommand(c.name)) continue;
      Manifest m;
      m.set("operation", c.name);
      for (auto& [key, value] : given[c.name]) {
        if (value.empty()) continue;
        if (key[0] == '@')
          merge_spec(m, key.substr(1), value);
        else
          m.set(key, value);
      }
      return emit(run(m), m);
    }
  } catch (const input_error& e) {
    return input_failure(e.what());
  }
  return 2;
}
