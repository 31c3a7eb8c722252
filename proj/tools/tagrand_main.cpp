// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness.  `run` executes a (cipher x mode x tool) grid and
// writes the verdict report in three formats; `export` dumps a raw tag
// stream for external analyzers; `report` re-renders a saved JSON report;
// `list` shows the registered ciphers.  Exit codes: 0 completed, 1 bad
// plan or arguments, 2 control calibration failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tagrand/aead.hpp"
#include "tagrand/report.hpp"
#include "tagrand/stream.hpp"

namespace {

using namespace tagrand;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

int cmd_run(const std::vector<std::string>& ciphers,
            const std::vector<std::string>& modes,
            const std::vector<std::string>& tools, const std::string& scale,
            std::uint64_t seed, const std::string& out_dir,
            bool no_controls) {
  ExperimentPlan plan;
  plan.ciphers = ciphers;
  plan.modes.clear();
  for (const std::string& m : modes) {
    plan.modes.push_back(pmn_mode_from_string(m));
  }
  plan.tools.clear();
  for (const std::string& t : tools) {
    plan.tools.push_back(tool_from_string(t));
  }
  plan.scale = scale_from_string(scale);
  plan.master_seed = seed;
  plan.include_controls = !no_controls;
  validate_plan(plan);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  const ExperimentReport report = run_experiment(plan);
  write_file(dir / "report.json", render_json(report));
  write_file(dir / "report.csv", render_csv(report));
  const std::string text = render_text(report);
  write_file(dir / "report.txt", text);
  std::cout << text;
  std::cout << "wrote " << (dir / "report.{json,csv,txt}").string() << "\n";
  return report.calibration_ok ? 0 : 2;
}

int cmd_export(const std::string& cipher, const std::string& mode,
               std::uint64_t tags, std::uint64_t seed,
               const std::string& out_file) {
  StreamConfig config;
  config.cipher = cipher;
  config.mode = pmn_mode_from_string(mode);
  config.num_tags = tags;
  config.master_seed = seed;
  const TagStream stream = generate_stream(config);
  export_stream(stream, out_file);
  std::cout << "wrote " << stream.bytes.size() << " tag bytes to " << out_file
            << " (+ .meta.json)\n";
  return 0;
}

int cmd_report(const std::string& in_file, const std::string& format) {
  std::ifstream in(in_file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + in_file);
  }
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  const ExperimentReport report = report_from_json(text);
  if (format == "text") {
    std::cout << render_text(report);
  } else if (format == "csv") {
    std::cout << render_csv(report);
  } else if (format == "json") {
    std::cout << render_json(report);
  } else {
    throw PlanInvalid("unknown format: " + format +
                      " (expected text, csv or json)");
  }
  return 0;
}

int cmd_list() {
  for (const std::string& name : CipherRegistry::instance().names()) {
    const CipherSpec& spec = CipherRegistry::instance().require(name).spec();
    std::printf("%-12s key=%zu pmn=%zu smn=%zu tag=%zu\n", name.c_str(),
                spec.key_len, spec.pmn_len, spec.smn_len, spec.tag_len);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Authentication-tag randomness harness: generates tag streams under "
      "zero/counter/random message-number schedules and tests them with a "
      "statistical battery, an avalanche analyzer and an evolutionary "
      "circuit distinguisher."};
  app.require_subcommand(1);

  // run
  std::vector<std::string> ciphers{"aes128gcm", "aes256gcm"};
  std::vector<std::string> modes{"zero", "counter", "random"};
  std::vector<std::string> tools{"battery", "sac", "eacirc"};
  std::string scale = "desk";
  std::uint64_t seed = 1;
  std::string out_dir;
  bool no_controls = false;
  CLI::App* run = app.add_subcommand("run", "Run an experiment grid");
  run->add_option("--ciphers", ciphers, "Ciphers to test")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--modes", modes, "Message-number modes")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--tools", tools, "Randomness tools")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--scale", scale, "Workload scale: desk or paper")
      ->capture_default_str();
  run->add_option("--seed", seed, "Master seed")->capture_default_str();
  run->add_option("--out", out_dir, "Output directory for report files")
      ->required();
  run->add_flag("--no-controls", no_controls,
                "Skip the control cipher rows");

  // export
  std::string exp_cipher = "aes128gcm";
  std::string exp_mode = "zero";
  std::uint64_t exp_tags = 0;
  std::uint64_t exp_seed = 1;
  std::string exp_out;
  CLI::App* exp = app.add_subcommand(
      "export", "Write a raw tag stream for external analyzers");
  exp->add_option("--cipher", exp_cipher, "Cipher name")
      ->capture_default_str();
  exp->add_option("--mode", exp_mode, "Message-number mode")
      ->capture_default_str();
  exp->add_option("--tags", exp_tags, "Number of tags")->required();
  exp->add_option("--seed", exp_seed, "Master seed")->capture_default_str();
  exp->add_option("--out", exp_out, "Output file")->required();

  // report
  std::string rep_in;
  std::string rep_format = "text";
  CLI::App* rep =
      app.add_subcommand("report", "Re-render a saved JSON report");
  rep->add_option("--in", rep_in, "report.json produced by run")->required();
  rep->add_option("--format", rep_format, "text, csv or json")
      ->capture_default_str();

  CLI::App* list = app.add_subcommand("list", "List registered ciphers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(ciphers, modes, tools, scale, seed, out_dir,
                     no_controls);
    }
    if (exp->parsed()) {
      return cmd_export(exp_cipher, exp_mode, exp_tags, exp_seed, exp_out);
    }
    if (rep->parsed()) {
      return cmd_report(rep_in, rep_format);
    }
    if (list->parsed()) {
      return cmd_list();
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
