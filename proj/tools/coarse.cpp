#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "coarse/cli.hpp"
#include "coarse/error.hpp"

using json = nlohmann::json;

namespace {

struct Flag {
  std::string option, key, help;
};

const std::map<std::string, std::vector<Flag>>& command_flags() {
  static const std::map<std::string, std::vector<Flag>> flags{
      {"net", {{"--K", "K", "net separation"}}},
      {"match",
       {{"--K", "K", "net constant"}, {"--a1", "a1", "first net (JSON or file)"}, {"--a2", "a2", "second net"}}},
      {"compose",
       {{"--f", "f", "first map (JSON or file)"},
        {"--f2", "f2", "second map"},
        {"--K", "K", "net constant"},
        {"--C", "C", "bi-Lipschitz constant"}}},
      {"verify",
       {{"--map", "map", "map to check (JSON or file)"},
        {"--target", "target", "target space (defaults to the input)"},
        {"--target-center", "target_center", "target window center"},
        {"--K", "K", "net constant"},
        {"--C", "C", "bi-Lipschitz constant"}}},
      {"growth",
       {{"--r-max", "r_max", "largest radius"},
        {"--tolerance", "tolerance", "classification tolerance"},
        {"--tail", "tail", "tail fraction for the fits"}}},
      {"folner",
       {{"--radii", "radii", "boundary radii"},
        {"--schedule", "schedule", "epsilon schedule a/n"},
        {"--max-n", "max_n", "number of sets"},
        {"--max-size", "max_size", "largest set"},
        {"--strategy", "strategy", "balls or shaved"},
        {"--certificate", "certificate", "certificate to verify (JSON or file)"}}},
      {"ends",
       {{"--mu", "mu", "coarse connectivity"},
        {"--depth", "depth", "levels"},
        {"--offset", "offset", "removed radius offset"}}},
      {"asdim", {{"--radii", "radii", "separation radii"}, {"--include-covers", "include_covers", "emit covers"}}},
      {"orbit", {{"--point", "point", "center point"}, {"--radius", "radius", "ball radius"}}},
      {"recur",
       {{"--target", "target", "target predicate (JSON)"},
        {"--sample-radius", "sample_radius", "sampled ball radius"},
        {"--basepoints", "basepoints", "basepoints (JSON list)"}}},
      {"reeb",
       {{"--point", "point", "center x"},
        {"--r", "r", "radius"},
        {"--y", "y", "second point"},
        {"--ys", "ys", "second points (JSON list)"}}},
      {"limitset", {{"--windows", "windows", "observation windows (JSON list)"}, {"--eps", "eps", "resolution"}}},
      {"double", {{"--radius", "radius", "window radius"}}},
      {"demo-rotation", {{"--n-max", "n_max", "largest n"}, {"--max-steps", "max_steps", "orbit search budget"}}},
  };
  return flags;
}

// Flag values are JSON when they parse as JSON, comma lists of integers become arrays, and
// anything else is a string.
json flag_value(const std::string& text) {
  if (std::regex_match(text, std::regex("[0-9]+(,[0-9]+)+"))) {
    json arr = json::array();
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) arr.push_back(std::stoull(part));
    return arr;
  }
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> help{
      {"net", "greedy K-separated net of the window"},
      {"match", "bijection between two K-nets"},
      {"compose", "composite of two coarse quasi-isometries"},
      {"verify", "check a map against (K,C)"},
      {"growth", "growth function, exponent fits and class"},
      {"folner", "search or verify a Folner certificate"},
      {"ends", "end forest and classification"},
      {"asdim", "asymptotic dimension profile with covers"},
      {"orbit", "orbit ball of a pseudogroup"},
      {"recur", "recurrence radius of a target set"},
      {"reeb", "Reeb neighborhood and transported balls"},
      {"limitset", "finite-resolution limit set sample"},
      {"double", "doubled pseudogroup and distance bounds"},
      {"demo-rotation", "small balls of a rotation inside a thin open set"},
  };
  return help;
}

int fail(const coarse::Error& e) {
  std::cout << e.to_json().dump(2) << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Executable coarse geometry: nets, coarse quasi-isometries, growth, ends, asdim, pseudogroups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", coarse::kToolVersion);

  coarse::ExperimentConfig base;
  std::string out_dir, params_text, input_text, center_text;
  app.add_option("--format", base.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--horizon", base.horizon, "window horizon");
  app.add_option("--budget", base.budget, "vertex budget for lazy spaces");
  app.add_option("--seed", base.seed, "recorded in the manifest");
  app.add_option("--out-dir", out_dir, "write the output and manifest.json here");
  app.add_option("--output", base.output, "output file name inside --out-dir");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::vector<CLI::App*> subs;
  for (const std::string& name : coarse::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, command_help().at(name));
    sub->fallthrough();
    sub->add_option("--input", input_text, "graph or pseudogroup (shorthand, file or JSON)");
    sub->add_option("--params", params_text, "parameters as a JSON object or @file");
    sub->add_option("--center", center_text, "window center (explicit graphs)");
    for (const Flag& f : command_flags().at(name)) sub->add_option(f.option, values[name][f.key], f.help);
    subs.push_back(sub);
  }
  std::string batch_file;
  std::size_t jobs = 1;
  CLI::App* batch = app.add_subcommand("batch", "run a JSON array of experiment configs");
  batch->fallthrough();
  batch->add_option("file", batch_file, "batch file")->required();
  batch->add_option("--jobs", jobs, "experiments run at once");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(coarse::Error(coarse::Errc::parse_error, e.what()));
  }

  try {
    if (batch->parsed()) {
      std::ifstream in(batch_file);
      if (!in) throw coarse::Error(coarse::Errc::io_error, "cannot open " + batch_file);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw coarse::Error(coarse::Errc::parse_error, batch_file + ": " + e.what());
      }
      if (!doc.is_array()) throw coarse::Error(coarse::Errc::parse_error, "batch file must be a JSON array");
      const std::string dir = std::filesystem::path(batch_file).parent_path().string();
      std::vector<coarse::ExperimentConfig> configs;
      for (const auto& j : doc) configs.push_back(coarse::config_from_json(j, dir));
      auto res = coarse::run_batch(configs, out_dir.empty() ? "run" : out_dir, jobs);
      std::cout << res.manifest.dump(2) << "\n";
      return res.status;
    }

    coarse::ExperimentConfig config = base;
    for (CLI::App* sub : subs) {
      if (!sub->parsed()) continue;
      config.command = sub->get_name();
      config.name = config.command;
      if (!params_text.empty()) {
        std::string text = params_text;
        if (text[0] == '@') {
          std::ifstream pin(text.substr(1));
          if (!pin) throw coarse::Error(coarse::Errc::io_error, "cannot open " + text.substr(1));
          text.assign(std::istreambuf_iterator<char>(pin), {});
        }
        try {
          config.params = json::parse(text);
        } catch (const json::exception& e) {
          throw coarse::Error(coarse::Errc::parse_error, std::string("--params: ") + e.what());
        }
        if (!config.params.is_object()) throw coarse::Error(coarse::Errc::parse_error, "--params must be an object");
      }
      for (const auto& [key, text] : values[config.command])
        if (!text.empty()) config.params[key] = flag_value(text);
      if (!center_text.empty()) config.params["center"] = flag_value(center_text);
      if (!input_text.empty()) config.input = input_text[0] == '{' ? flag_value(input_text) : json(input_text);
    }
    if (!out_dir.empty()) return coarse::run_batch({config}, out_dir).status;
    coarse::RunResult r = coarse::run(config);
    std::cout << coarse::render(r, config.format);
    return r.status;
  } catch (const coarse::Error& e) {
    return fail(e);
  }
}
