// Command-line entry point: synth | train | eval | predict | serve.
//
// Exit codes: 0 success, 1 usage, 2 data/model error, 3 runtime failure.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gesture/dataio.hpp"
#include "gesture/metrics.hpp"
#include "gesture/serve.hpp"
#include "gesture/synth.hpp"
#include "gesture/trainer.hpp"

namespace fs = std::filesystem;
using namespace gesture;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kDataError = 2, kRuntimeError = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TcpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_synth(const synth::SynthConfig& config, const fs::path& out) {
  const auto ds = synth::generate(config);
  write_dataset(ds, out);
  std::cerr << "wrote " << ds.size() << " samples from " << config.subjects << " subjects to " << out.string()
            << "\n";
  return kOk;
}

std::string checkpoint_name(const std::string& subject) { return "fold-" + subject + ".ckpt"; }

int cmd_train(const fs::path& data, const fs::path& out_dir, const TrainConfig& config,
              const std::optional<std::string>& fold, std::size_t jobs) {
  const auto ds = read_dataset(data);
  std::cerr << "loaded " << ds.size() << " samples, " << subjects(ds).size() << " subjects\n";
  const auto result = run_loso(ds, config, fold, jobs);

  fs::create_directories(out_dir);
  for (const auto& fr : result.folds) {
    save_checkpoint(to_checkpoint(fr, config), out_dir / checkpoint_name(fr.fold.held_out_subject));
    std::cerr << "fold " << fr.fold.held_out_subject << ": " << fr.report.epochs_run() << " epochs, best "
              << fr.report.best_epoch << ", " << fr.report.wall_seconds << " s\n";
  }
  const auto text = render_training_report(result, config);
  write_file(out_dir / "report.txt", text);
  write_file(out_dir / "report.json", report_to_json(report(result.pooled), result.pooled).dump(2) + "\n");
  std::cout << text;
  return kOk;
}

int cmd_eval(const fs::path& data, const std::optional<fs::path>& model,
             const std::optional<fs::path>& model_dir, const std::optional<fs::path>& json_out) {
  const auto ds = read_dataset(data);
  std::vector<fs::path> files;
  if (model) {
    files.push_back(*model);
  } else {
    if (!fs::is_directory(*model_dir)) throw DataError("model directory '" + model_dir->string() + "' not found");
    for (const auto& entry : fs::directory_iterator(*model_dir)) {
      if (entry.path().extension() == ".ckpt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .ckpt files in '" + model_dir->string() + "'");
  }

  ConfusionMatrix pooled;
  for (const auto& file : files) {
    const auto predictor = Predictor::from_file(file);
    const auto& held_out = predictor.checkpoint().meta.held_out_subject;
    // A fold checkpoint only scores its own held-out subject; a single --model scores everything.
    const bool restrict = model_dir.has_value() && !held_out.empty();
    for (const auto& s : ds.samples) {
      if (restrict && s.subject != held_out) continue;
      pooled.accumulate(s.label, predictor.predict(s.frame).gesture);
    }
  }
  const auto rep = report(pooled);
  std::cout << render_report(rep, pooled);
  if (json_out) write_file(*json_out, report_to_json(rep, pooled).dump(2) + "\n");
  return kOk;
}

int cmd_predict(const fs::path& model) {
  const auto predictor = Predictor::from_file(model);
  const auto errors = serve_stream(predictor, std::cin, std::cout);
  if (errors > 0) {
    std::cerr << errors << " input line(s) could not be predicted\n";
    return kDataError;
  }
  return kOk;
}

int cmd_serve(const fs::path& model, const std::optional<std::string>& listen, bool stdio) {
  const auto predictor = Predictor::from_file(model);
  if (stdio) {
    serve_stream(predictor, std::cin, std::cout);
    return kOk;
  }
  const auto [host, port] = parse_endpoint(*listen);
  TcpServer server(predictor, host, port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << host << ":" << server.port() << std::endl;
  server.run();
  g_server = nullptr;
  std::cerr << "server stopped\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-landmark gesture classifier toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic landmark dataset");
  synth::SynthConfig synth_config;
  fs::path synth_out;
  synth_cmd->add_option("--out", synth_out, "Output dataset file")->required();
  synth_cmd->add_option("--subjects", synth_config.subjects, "Number of subjects")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--per-class", synth_config.samples_per_class_per_subject,
                        "Samples per class, per subject, per distance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth_config.noise_std, "Gaussian landmark noise (std)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--distances", synth_config.distances, "Recording distances in meters")
      ->capture_default_str()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth_config.seed, "Random seed")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train with leave-one-subject-out folds");
  TrainConfig train_config;
  fs::path train_data, train_out;
  std::optional<std::string> train_fold_subject;
  std::size_t jobs = 1;
  train_cmd->add_option("--data", train_data, "Dataset file")->required();
  train_cmd->add_option("--out", train_out, "Output directory for checkpoints and report")->required();
  train_cmd->add_option("--seed", train_config.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--fold", train_fold_subject, "Train only the fold holding out this subject");
  train_cmd->add_flag("--normalize", train_config.normalize, "Hip-centred, torso-scaled inputs");
  train_cmd->add_option("--max-epochs", train_config.max_epochs)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", train_config.patience, "Early-stopping patience in epochs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", train_config.batch_size, "Mini-batch size (0 = full batch)")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_config.adam.learning_rate)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--beta1", train_config.adam.beta1)->capture_default_str()->check(CLI::Range(0.0, 0.999999999));
  train_cmd->add_option("--beta2", train_config.adam.beta2)->capture_default_str()->check(CLI::Range(0.0, 0.999999999));
  train_cmd->add_option("--eps", train_config.adam.epsilon)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--jobs", jobs, "Folds trained concurrently")->capture_default_str()->check(CLI::PositiveNumber);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score checkpoints against a dataset");
  fs::path eval_data;
  std::optional<fs::path> eval_model, eval_model_dir, eval_json;
  eval_cmd->add_option("--data", eval_data, "Dataset file")->required();
  auto* model_opt = eval_cmd->add_option("--model", eval_model, "Single checkpoint (scores every sample)");
  auto* dir_opt = eval_cmd->add_option("--model-dir", eval_model_dir,
                                       "Directory of fold checkpoints (pooled held-out predictions)");
  model_opt->excludes(dir_opt);
  eval_cmd->add_option("--json", eval_json, "Also write the report as JSON");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict frames read line by line from stdin");
  fs::path predict_model;
  bool predict_stdio = true;
  predict_cmd->add_option("--model", predict_model, "Checkpoint file")->required();
  predict_cmd->add_flag("--stdio", predict_stdio, "Read frames from stdin (the default)");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Streaming prediction service");
  fs::path serve_model;
  std::optional<std::string> listen;
  bool serve_stdio = false;
  serve_cmd->add_option("--model", serve_model, "Checkpoint file")->required();
  auto* listen_opt = serve_cmd->add_option("--listen", listen, "TCP endpoint host:port (port 0 = any)");
  auto* stdio_opt = serve_cmd->add_flag("--stdio", serve_stdio, "Serve stdin/stdout instead of TCP");
  listen_opt->excludes(stdio_opt);

  try {
    app.parse(argc, argv);
    if (*eval_cmd && !eval_model && !eval_model_dir) throw UsageError("eval needs --model or --model-dir");
    if (*serve_cmd && !listen && !serve_stdio) throw UsageError("serve needs --listen or --stdio");

    if (*synth_cmd) return cmd_synth(synth_config, synth_out);
    if (*train_cmd) return cmd_train(train_data, train_out, train_config, train_fold_subject, jobs);
    if (*eval_cmd) return cmd_eval(eval_data, eval_model, eval_model_dir, eval_json);
    if (*predict_cmd) return cmd_predict(predict_model);
    if (*serve_cmd) return cmd_serve(serve_model, listen, serve_stdio);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsage;
}
