#include "maskcraft/cli/commands.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

#include "maskcraft/cli/render.hpp"
#include "maskcraft/data/coco_io.hpp"
#include "maskcraft/data/image_io.hpp"
#include "maskcraft/data/shapes_dataset.hpp"
#include "maskcraft/errors.hpp"
#include "maskcraft/eval/evaluate.hpp"
#include "maskcraft/training/checkpoint.hpp"
#include "maskcraft/training/trainer.hpp"

extern char** environ;

namespace maskcraft::cli {

using nlohmann::json;

namespace {

bool non_empty_dir(const fs::path& p) { return fs::exists(p) && !fs::is_empty(p); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

data::Dataset load_dataset(const fs::path& dir, int limit = 0) {
  if (!fs::is_directory(dir)) throw LoadError("dataset directory not found: " + dir.string());
  auto ds = data::load_dataset_dir(dir);
  if (limit > 0 && static_cast<int>(ds.samples.size()) > limit) ds.samples.resize(limit);
  return ds;
}

json reports_json(const std::map<eval::Task, eval::APReport>& reports) {
  json j = json::object();
  for (const auto& [task, r] : reports) j[eval::to_string(task)] = eval::to_json(r);
  return j;
}

std::vector<std::pair<std::string, eval::APReport>> report_rows(const std::string& name,
                                                                const std::map<eval::Task, eval::APReport>& reports) {
  std::vector<std::pair<std::string, eval::APReport>> rows;
  for (const auto& [task, r] : reports) rows.emplace_back(name, r);
  return rows;
}

}  // namespace

std::string dataset_digest(const data::Dataset& dataset) {
  json j{{"annotations", data::to_coco_json(dataset)}};
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& s : dataset.samples) {
    for (float v : s.image.pixels) {
      h ^= static_cast<std::uint64_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
      h *= 1099511628211ULL;
    }
  }
  j["pixels"] = h;
  return json_digest(j);
}

Config resolve_config(const std::optional<fs::path>& path) {
  if (!path) return desk_scale_config();
  if (!fs::exists(*path)) throw LoadError("config file not found: " + path->string());
  return load_config(*path);
}

std::string cmd_synth(const SynthArgs& args, std::ostream& out) {
  if (args.count < 1) throw ArgumentError("--count must be >= 1");
  if (args.out.empty()) throw ArgumentError("--out is required");
  if (non_empty_dir(args.out)) {
    if (!args.force) throw ArgumentError(args.out.string() + " is not empty; pass --force to overwrite");
    fs::remove_all(data::images_dir(args.out));
    fs::remove(data::annotations_path(args.out));
  }
  const auto ds = data::make_shapes_dataset(args.seed, args.count, args.size, args.max_instances);
  data::write_coco_dataset(ds, args.out);
  const auto digest = dataset_digest(data::load_dataset_dir(args.out));
  std::size_t instances = 0;
  for (const auto& s : ds.samples) instances += s.annotations.size();
  if (args.json) {
    out << json{{"digest", digest}, {"images", ds.samples.size()}, {"instances", instances},
                {"out", args.out.string()}}.dump()
        << '\n';
  } else {
    out << "wrote " << ds.samples.size() << " images, " << instances << " instances to " << args.out.string()
        << "\ndigest " << digest << '\n';
  }
  return digest;
}

json cmd_train(const TrainArgs& args, std::ostream& out) {
  if (args.steps < 1) throw ArgumentError("--steps must be >= 1");
  if (args.out.empty()) throw ArgumentError("--out is required");
  const auto config = resolve_config(args.config);
  const auto dataset = load_dataset(args.dataset);
  if (dataset.samples.empty()) throw ArgumentError("dataset has no images: " + args.dataset.string());

  const fs::path ckpt = args.out / "checkpoint.pt";
  training::TrainOptions opts;
  opts.total_steps = args.steps;
  opts.seed = args.seed;
  opts.out_dir = args.out;
  opts.deterministic = args.deterministic;
  if (args.resume) {
    if (!fs::exists(ckpt)) throw ArgumentError("--resume: no checkpoint in " + args.out.string());
    opts.resume_from = ckpt;
  } else if (fs::exists(ckpt) && !args.force) {
    throw ArgumentError(args.out.string() + " already holds a checkpoint; pass --force or --resume");
  }
  fs::create_directories(args.out);
  save_config(config, args.out / "config.json");

  const std::int64_t every = std::max<std::int64_t>(1, args.steps / 20);
  if (!args.json) {
    opts.on_step = [&](const training::StepRecord& r) {
      if (r.step % every == 0 || r.step == args.steps) {
        out << "step " << r.step << "/" << args.steps << std::fixed << std::setprecision(4)
            << "  total " << r.losses.total << "  cls " << r.losses.l_cls << "  box " << r.losses.l_box
            << "  mask " << r.losses.l_mask << "  alpha " << std::setprecision(2) << r.losses.alpha << '\n'
            << std::defaultfloat << std::flush;
      }
    };
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = training::train(config, dataset, opts);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json record{{"variant", "train"},
              {"seed", args.seed},
              {"steps", args.steps},
              {"checkpoint", result.checkpoint.string()},
              {"loss_trace", result.metrics_log.string()},
              {"config_hash", json_digest(to_json(config))},
              {"wall_time", wall},
              {"status", "ok"}};
  write_json(args.out / "run.json", record);
  if (args.json) {
    out << record.dump() << '\n';
  } else {
    out << "checkpoint " << result.checkpoint.string() << '\n';
  }
  return record;
}

std::map<eval::Task, eval::APReport> cmd_eval(const EvalArgs& args, std::ostream& out) {
  if (args.limit < 0) throw ArgumentError("--limit must be >= 0");
  const auto ckpt = training::load_checkpoint(args.checkpoint);
  std::optional<Config> expected;
  if (args.config) expected = resolve_config(args.config);
  auto model = training::load_model(ckpt, expected ? &expected->model : nullptr);
  const auto dataset = load_dataset(args.dataset, args.limit);
  std::vector<eval::Prediction> predictions;
  const auto reports = eval::evaluate_model(model, dataset, ckpt.config.eval, {eval::Task::kSegm, eval::Task::kBbox},
                                            &predictions);
  if (args.out) {
    fs::create_directories(*args.out);
    write_json(*args.out / "predictions.json", eval::predictions_to_json(predictions));
    write_json(*args.out / "report.json", reports_json(reports));
  }
  if (args.json) {
    out << reports_json(reports).dump() << '\n';
  } else {
    out << eval::format_table(report_rows(args.checkpoint.parent_path().filename().string(), reports));
  }
  return reports;
}

AblationSpec parse_ablation_spec(const json& j, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  AblationSpec spec;
  try {
    for (const auto& [key, value] : j.items()) {
      static const std::set<std::string> known{"base_config", "variants",    "seeds", "output_dir",
                                               "train_dataset", "val_dataset", "steps"};
      if (!known.count(key)) throw ArgumentError("ablation spec: unknown key '" + key + "'");
    }
    if (j.contains("base_config") && !j["base_config"].is_null()) {
      spec.base_config = resolve(j["base_config"].get<std::string>());
    }
    std::set<std::string> names;
    for (const auto& v : j.at("variants")) {
      Variant variant{v.at("name").get<std::string>(), v.value("overrides", json::object())};
      if (variant.name.empty() || variant.name.find('/') != std::string::npos) {
        throw ArgumentError("ablation spec: invalid variant name '" + variant.name + "'");
      }
      if (!names.insert(variant.name).second) {
        throw ArgumentError("ablation spec: duplicate variant name '" + variant.name + "'");
      }
      spec.variants.push_back(std::move(variant));
    }
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.output_dir = resolve(j.at("output_dir").get<std::string>());
    spec.train_dataset = resolve(j.at("train_dataset").get<std::string>());
    spec.val_dataset = resolve(j.at("val_dataset").get<std::string>());
    spec.steps = j.value("steps", spec.steps);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("ablation spec: ") + e.what());
  }
  if (spec.variants.empty()) throw ArgumentError("ablation spec: no variants");
  if (spec.seeds.empty()) throw ArgumentError("ablation spec: at least one seed is required");
  if (spec.steps < 1) throw ArgumentError("ablation spec: steps must be >= 1");
  return spec;
}

AblationSpec load_ablation_spec(const fs::path& path) {
  if (!fs::exists(path)) throw ArgumentError("ablation spec not found: " + path.string());
  return parse_ablation_spec(read_json(path), path.parent_path());
}

Config variant_config(const AblationSpec& spec, const Variant& variant) {
  const auto base = spec.base_config.empty() ? desk_scale_config() : load_config(spec.base_config);
  return config_from_json(apply_overrides(to_json(base), variant.overrides));
}

fs::path run_dir(const AblationSpec& spec, const std::string& variant, std::uint64_t seed) {
  return spec.output_dir / variant / ("seed" + std::to_string(seed));
}

namespace {

bool completed(const fs::path& dir, const std::string& hash, std::uint64_t seed, std::int64_t steps) {
  const auto path = dir / "run.json";
  if (!fs::exists(path)) return false;
  try {
    const auto r = read_json(path);
    return r.value("status", "") == "ok" && r.value("config_hash", "") == hash &&
           r.value("seed", std::uint64_t{0}) == seed && r.value("steps", std::int64_t{0}) == steps;
  } catch (const Error&) {
    return false;
  }
}

json run_one(const AblationSpec& spec, const Variant& variant, std::uint64_t seed, const data::Dataset& train_set,
             const data::Dataset& val_set, bool deterministic) {
  const auto dir = run_dir(spec, variant.name, seed);
  json record{{"variant", variant.name}, {"seed", seed}, {"steps", spec.steps}};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto config = variant_config(spec, variant);
    record["config_hash"] = json_digest(to_json(config));
    fs::create_directories(dir);
    save_config(config, dir / "config.json");
    training::TrainOptions opts;
    opts.total_steps = spec.steps;
    opts.seed = seed;
    opts.out_dir = dir;
    opts.deterministic = deterministic;
    auto result = training::train(config, train_set, opts);
    const auto reports = eval::evaluate_model(result.model, val_set, config.eval);
    record["checkpoint"] = result.checkpoint.string();
    record["loss_trace"] = result.metrics_log.string();
    record["segm"] = eval::to_json(reports.at(eval::Task::kSegm));
    record["bbox"] = eval::to_json(reports.at(eval::Task::kBbox));
    record["status"] = "ok";
  } catch (const std::exception& e) {
    record["status"] = "failed";
    record["error"] = e.what();
  }
  record["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fs::create_directories(dir);
  write_json(dir / "run.json", record);
  return record;
}

int spawn_worker(const fs::path& exe, const std::vector<std::string>& argv_strings, const fs::path& log) {
  std::vector<char*> argv;
  for (const auto& s : argv_strings) argv.push_back(const_cast<char*>(s.c_str()));
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, exe.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw TrainingError("cannot launch worker " + exe.string());
  return pid;
}

}  // namespace

std::vector<json> cmd_ablate(const AblateArgs& args, std::ostream& out) {
  if (args.jobs < 1) throw ArgumentError("--jobs must be >= 1");
  const auto spec = load_ablation_spec(args.spec);
  struct Run {
    const Variant* variant;
    std::uint64_t seed;
  };
  std::vector<Run> grid;
  for (const auto& v : spec.variants) {
    for (auto s : spec.seeds) {
      if (args.only && *args.only != v.name + "/" + std::to_string(s)) continue;
      grid.push_back({&v, s});
    }
  }
  if (args.only && grid.empty()) throw ArgumentError("--only matches no run: " + *args.only);

  std::vector<Run> pending;
  for (const auto& run : grid) {
    std::string hash;
    try {
      hash = json_digest(to_json(variant_config(spec, *run.variant)));
    } catch (const Error&) {
      // An invalid variant is recorded as a failed run below.
    }
    if (args.resume && !hash.empty() &&
        completed(run_dir(spec, run.variant->name, run.seed), hash, run.seed, spec.steps)) {
      if (!args.json && !args.only) out << "skip " << run.variant->name << "/" << run.seed << " (complete)\n";
      continue;
    }
    pending.push_back(run);
  }

  if (!pending.empty()) {
    if (args.jobs > 1 && !args.only && pending.size() > 1) {
      if (args.self_exe.empty()) throw ArgumentError("parallel ablation needs the executable path");
      fs::create_directories(spec.output_dir);
      std::vector<pid_t> running;
      auto wait_one = [&] {
        int status = 0;
        const pid_t pid = waitpid(-1, &status, 0);
        running.erase(std::remove(running.begin(), running.end(), pid), running.end());
      };
      for (const auto& run : pending) {
        while (static_cast<int>(running.size()) >= args.jobs) wait_one();
        const std::string id = run.variant->name + "/" + std::to_string(run.seed);
        std::vector<std::string> argv{args.self_exe.string(), "ablate", "--spec", args.spec.string(), "--only", id};
        const auto dir = run_dir(spec, run.variant->name, run.seed);
        fs::create_directories(dir);
        running.push_back(spawn_worker(args.self_exe, argv, dir / "worker.log"));
        if (!args.json) out << "launched " << id << '\n' << std::flush;
      }
      while (!running.empty()) wait_one();
    } else {
      const auto train_set = load_dataset(spec.train_dataset);
      const auto val_set = load_dataset(spec.val_dataset);
      for (const auto& run : pending) {
        if (!args.json && !args.only) out << "run " << run.variant->name << "/" << run.seed << " ... " << std::flush;
        const auto rec = run_one(spec, *run.variant, run.seed, train_set, val_set, args.deterministic);
        if (!args.json && !args.only) {
          if (rec["status"] == "ok") {
            out << "segm AP " << std::fixed << std::setprecision(1) << 100.0 * rec["segm"]["AP"].get<double>()
                << std::defaultfloat << " (" << std::lround(rec["wall_time"].get<double>()) << " s)\n";
          } else {
            out << "failed: " << rec["error"].get<std::string>() << '\n';
          }
        }
      }
    }
  }

  std::vector<json> records;
  for (const auto& run : grid) {
    const auto path = run_dir(spec, run.variant->name, run.seed) / "run.json";
    if (fs::exists(path)) {
      records.push_back(read_json(path));
    } else {
      records.push_back({{"variant", run.variant->name},
                         {"seed", run.seed},
                         {"status", "failed"},
                         {"error", "worker produced no record"}});
    }
  }
  const bool any_ok = std::any_of(records.begin(), records.end(), [](const json& r) { return r["status"] == "ok"; });
  if (args.only) {
    if (!any_ok) throw TrainingError(records.front().value("error", "run failed"));
    return records;
  }
  std::vector<std::string> order;
  for (const auto& v : spec.variants) order.push_back(v.name);
  const auto table = format_ablation_table(order, records);
  fs::create_directories(spec.output_dir);
  write_json(spec.output_dir / "records.json", records);
  {
    std::ofstream t(spec.output_dir / "table.txt");
    t << table;
  }
  if (args.json) {
    out << json(records).dump() << '\n';
  } else {
    out << table;
  }
  if (!any_ok) throw TrainingError("every ablation run failed");
  return records;
}

std::string format_ablation_table(const std::vector<std::string>& variant_order, const std::vector<json>& records) {
  static const std::vector<std::string> columns{"AP", "AP50", "AP75", "APS", "APM", "APL"};
  std::size_t name_width = 7;
  for (const auto& v : variant_order) name_width = std::max(name_width, v.size());
  constexpr int kCell = 18;
  std::string out;
  for (const std::string task : {"segm", "bbox"}) {
    char buf[64];
    out += task + " (mean [min,max] over seeds)\n";
    out += "variant" + std::string(name_width - 7, ' ') + "  runs";
    for (const auto& c : columns) {
      std::snprintf(buf, sizeof buf, "%*s", kCell, c.c_str());
      out += buf;
    }
    out += '\n';
    for (const auto& name : variant_order) {
      std::vector<const json*> ok;
      int total = 0;
      for (const auto& r : records) {
        if (r.value("variant", "") != name) continue;
        ++total;
        if (r.value("status", "") == "ok" && r.contains(task)) ok.push_back(&r);
      }
      std::snprintf(buf, sizeof buf, "  %zu/%d", ok.size(), total);
      out += name + std::string(name_width - name.size(), ' ') + buf;
      for (const auto& c : columns) {
        std::vector<double> vals;
        for (const auto* r : ok) {
          const double v = (*r)[task][c].get<double>();
          if (v >= 0.0) vals.push_back(100.0 * v);
        }
        if (vals.empty()) {
          std::snprintf(buf, sizeof buf, "%*s", kCell, "-");
        } else {
          double mean = 0.0;
          for (double v : vals) mean += v;
          mean /= static_cast<double>(vals.size());
          const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
          char cell[48];
          std::snprintf(cell, sizeof cell, "%.1f [%.1f,%.1f]", mean, *lo, *hi);
          std::snprintf(buf, sizeof buf, "%*s", kCell, cell);
        }
        out += buf;
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<fs::path> cmd_render(const RenderArgs& args, std::ostream& out) {
  if (args.limit < 1) throw ArgumentError("--limit must be >= 1");
  if (args.out.empty()) throw ArgumentError("--out is required");
  if (non_empty_dir(args.out) && !args.force) {
    throw ArgumentError(args.out.string() + " is not empty; pass --force to write into it");
  }
  const auto ckpt = training::load_checkpoint(args.checkpoint);
  auto model = training::load_model(ckpt);
  const auto dataset = load_dataset(args.dataset, args.limit);
  fs::create_directories(args.out);
  std::vector<fs::path> written;
  for (const auto& sample : dataset.samples) {
    const auto detections = model->infer(sample, ckpt.config.eval);
    const auto path = args.out / (fs::path(sample.file_name).stem().string() + "_overlay.ppm");
    if (detections.empty()) {
      data::write_ppm(path, sample.image);
    } else {
      data::write_ppm(path, render_overlay(sample.image, detections).image);
    }
    written.push_back(path);
    out << path.string() << "  " << detections.size() << " detections\n";
  }
  return written;
}

}  // namespace maskcraft::cli
