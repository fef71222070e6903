#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include <json.hpp>

#include "reidkit/config.hpp"
#include "reidkit/error.hpp"
#include "reidkit/evaluator.hpp"
#include "reidkit/image_io.hpp"
#include "reidkit/preprocess.hpp"
#include "reidkit/report.hpp"
#include "reidkit/store.hpp"
#include "reidkit/synthetic.hpp"
#include "reidkit/trainer.hpp"

namespace reidkit::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

void report_error(const std::string& what) { std::cerr << "error: " << what << '\n'; }

/// Accepts a store name or either of its two file paths.
std::string store_name(const std::string& arg) {
  for (const std::string suffix : {".meta.jsonl", ".f32"}) {
    if (arg.size() > suffix.size() && arg.ends_with(suffix)) {
      return arg.substr(0, arg.size() - suffix.size());
    }
  }
  return arg;
}

std::string head_name(const std::string& arg) {
  for (const std::string suffix : {".meta.json", ".f32"}) {
    if (arg.size() > suffix.size() && arg.ends_with(suffix)) {
      return arg.substr(0, arg.size() - suffix.size());
    }
  }
  return arg;
}

void require_file(const fs::path& p, const std::string& role) {
  if (!fs::is_regular_file(p)) {
    throw Error(ErrorCode::kIo, role + " not found: " + p.string());
  }
}

void require_dir(const fs::path& p, const std::string& role) {
  if (!fs::is_directory(p)) {
    throw Error(ErrorCode::kIo, role + " is not a directory: " + p.string());
  }
}

void require_store(const std::string& name) {
  const auto paths = StorePaths::from_name(name);
  require_file(paths.meta, "store metadata");
  require_file(paths.blob, "store blob");
}

void require_head(const std::string& name) {
  require_file(name + ".meta.json", "head metadata");
  require_file(name + ".f32", "head weights");
}

void require_output_parent(const fs::path& p) {
  const auto parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw Error(ErrorCode::kIo, "output directory does not exist: " + parent.string());
  }
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<fs::path> find_mask(const fs::path& masks, const std::string& stem) {
  for (const auto& candidate :
       {masks / (stem + ".png"), masks / (stem + "_mask.png"), masks / (stem + ".json")}) {
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

ordered_json box_json(const Box& b) {
  ordered_json j;
  j["x"] = b.x;
  j["y"] = b.y;
  j["width"] = b.width;
  j["height"] = b.height;
  return j;
}

/// Store features, projected through the head when one is given.
Matrix features_for(const EmbeddingSet& set, const std::optional<std::string>& head) {
  if (!head) return to_matrix(set);
  const LinearHead h = read_head(head_name(*head));
  if (h.d_in() != set.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "head expects dim " + std::to_string(h.d_in()) + " but store has dim " +
                    std::to_string(set.dim()));
  }
  return head_forward(h, to_matrix(set));
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  auto base = out;
  base.replace_extension();
  return base.string() + suffix;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    report_error(e.what());
    return 1;
  }
}

}  // namespace

int run_preprocess(const PreprocessArgs& args) {
  return guarded([&] {
    require_dir(args.images, "images directory");
    require_dir(args.masks, "masks directory");
    PreprocessConfig cfg;
    if (args.config) {
      require_file(*args.config, "config");
      cfg = preprocess_config_from(read_config(*args.config), {}, args.config->string());
    }
    cfg.transform.validate();
    const auto images = png_files(args.images);
    if (images.empty()) {
      throw Error(ErrorCode::kEmptyDomain, "no PNG images in " + args.images.string());
    }
    fs::create_directories(args.out);

    std::string manifest;
    int failures = 0;
    for (const auto& image_path : images) {
      const std::string stem = image_path.stem().string();
      try {
        const auto mask_path = find_mask(args.masks, stem);
        if (!mask_path) {
          throw Error(ErrorCode::kIo, "missing mask for image " + image_path.string());
        }
        const RgbImage img = read_png_rgb(image_path);
        const BinaryMask mask = mask_path->extension() == ".json" ? read_polygon_mask(*mask_path)
                                                                   : read_png_mask(*mask_path);
        const Box crop = mask_bounding_box(mask, cfg.crop_pad);
        const RgbImage cut = crop_instance(img, mask, cfg.crop_pad);
        const RgbImage canvas = resize_pad_square(cut, cfg.transform);
        const fs::path canvas_path = args.out / (stem + ".png");
        write_png_rgb(canvas, canvas_path);

        ordered_json line;
        line["source"] = image_path.filename().string();
        line["mask"] = mask_path->filename().string();
        line["canvas"] = canvas_path.filename().string();
        line["source_height"] = img.height;
        line["source_width"] = img.width;
        line["crop"] = box_json(crop);
        line["content"] = box_json(content_box(cut.height, cut.width, cfg.transform.target));
        line["target"] = cfg.transform.target;
        line["pad_value"] = cfg.transform.pad_value;
        manifest += line.dump() + "\n";
      } catch (const std::exception& e) {
        report_error(e.what());
        ++failures;
      }
    }
    write_text(args.out / "manifest.jsonl", manifest);
    std::cout << images.size() - static_cast<std::size_t>(failures) << "/" << images.size()
              << " canvases written to " << args.out.string() << '\n';
    return failures == 0 ? 0 : 1;
  });
}

int run_stats(const StatsArgs& args) {
  return guarded([&] {
    require_dir(args.canvases, "canvases directory");
    require_output_parent(args.out);
    const auto files = png_files(args.canvases);
    if (files.empty()) {
      throw Error(ErrorCode::kEmptyDomain, "no PNG canvases in " + args.canvases.string());
    }
    std::vector<RgbImage> images;
    images.reserve(files.size());
    for (const auto& f : files) images.push_back(read_png_rgb(f));
    const auto stats = compute_stats(images);
    ordered_json j;
    j["mean"] = stats.mean;
    j["std"] = stats.std;
    write_text(args.out, j.dump(2) + "\n");
    std::cout << "stats over " << files.size() << " canvases written to " << args.out.string()
              << '\n';
    return 0;
  });
}

int run_train(const TrainArgs& args) {
  return guarded([&] {
    const auto train_name = store_name(args.train_store);
    const auto val_name = store_name(args.val_store);
    require_store(train_name);
    require_store(val_name);
    require_output_parent(args.out_head);
    const fs::path history_path = args.history ? *args.history : fs::path(args.out_head + ".history.csv");
    require_output_parent(history_path);

    TrainConfig cfg;
    if (args.config) {
      require_file(*args.config, "config");
      cfg = train_config_from(read_config(*args.config), {}, args.config->string());
    }
    if (args.seed) cfg.seed = *args.seed;
    cfg.validate();

    const auto train_set = read_store(StorePaths::from_name(train_name));
    const auto val_set = read_store(StorePaths::from_name(val_name));
    const auto result = train(train_set, val_set, cfg);
    write_head(result.head, args.out_head);
    write_text(history_path, history_to_csv(result.history));
    if (!result.history.empty()) {
      const auto& last = result.history.back();
      std::printf("trained %zu epochs: train_loss %.6g val_loss %.6g lr %.3g\n", last.epoch,
                  last.train_loss, last.val_loss, last.learning_rate);
    } else {
      std::printf("epochs = 0: wrote the initial head\n");
    }
    return 0;
  });
}

int run_eval(const EvalArgs& args) {
  return guarded([&] {
    const auto name = store_name(args.store);
    require_store(name);
    if (args.head) require_head(head_name(*args.head));
    require_output_parent(args.out);
    const auto distances_path = args.distances ? *args.distances : sibling(args.out, ".distances.csv");
    const auto kde_path = args.kde ? *args.kde : sibling(args.out, ".kde.csv");

    const auto set = read_store(StorePaths::from_name(name));
    const Matrix features = features_for(set, args.head);
    const auto report = evaluate(features, set, args.seed, args.k);
    write_text(args.out, report_to_json(report));

    const auto samples =
        distance_distributions(features, set, args.seed + kDistanceSeedOffset, args.max_pairs);
    write_text(distances_path, distances_to_csv(samples));
    if (const auto curves = kde_curves(samples)) {
      write_text(kde_path, kde_to_csv(*curves));
    } else {
      std::cout << "note: degenerate distance samples, no KDE written\n";
    }
    std::printf("R1 %.2f%%  mAP@%zu %.2f%%  (%zu queries, %zu excluded)\n", report.r1, report.k,
                report.map_at_k, report.num_queries, report.excluded_queries);
    return 0;
  });
}

int run_crosseval(const CrossEvalArgs& args) {
  return guarded([&] {
    const auto name = store_name(args.store);
    require_store(name);
    if (args.head) require_head(head_name(*args.head));
    require_output_parent(args.out);
    const auto set = read_store(StorePaths::from_name(name));
    const Matrix features = features_for(set, args.head);
    const auto grid = grid_scenarios();
    const auto cells = cross_condition_eval(features, set, grid, args.seed, args.k);
    write_text(args.out, cross_condition_to_json(cells));
    std::printf("%-18s", "query \\ gallery");
    for (const auto& c : all_conditions()) std::printf(" %18s", condition_label(c).c_str());
    std::printf("\n");
    for (std::size_t q = 0; q < 4; ++q) {
      std::printf("%-18s", condition_label(all_conditions()[q]).c_str());
      for (std::size_t g = 0; g < 4; ++g) {
        const auto& r = cells[q * 4 + g].report;
        std::printf("      %5.1f / %5.1f", r.r1, r.map_at_k);
      }
      std::printf("\n");
    }
    return 0;
  });
}

int run_report(const ReportArgs& args) {
  return guarded([&] {
    for (const auto& p : args.reports) require_file(p, "report");
    require_output_parent(args.out);
    const auto rows = merge_reports(args.reports);
    const auto csv = rows_to_csv(rows);
    write_text(args.out, csv);
    std::cout << csv;
    return 0;
  });
}

int run_synth(const SynthArgs& args) {
  return guarded([&] {
    require_output_parent(args.out);
    SyntheticConfig cfg;
    cfg.seed = args.seed;
    cfg.identities = args.identities;
    cfg.instances = args.instances;
    cfg.feature_dim = args.feature_dim;
    cfg.train_identities = args.train_identities;
    cfg.val_identities = args.val_identities;
    cfg.instance_sigma = args.instance_sigma;
    cfg.nuisance_sigma = args.nuisance_sigma;
    cfg.conditions = args.conditions;
    cfg.viewpoint_shift = args.viewpoint_shift;
    cfg.occlusion_sigma = args.occlusion_sigma;
    const auto set = make_synthetic(cfg);
    for (const Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
      const auto part = set.filter(s);
      const std::string name = args.out + "_" + std::string(to_string(s));
      write_store(part, StorePaths::from_name(name));
      std::printf("%s: %zu records, dim %zu\n", name.c_str(), part.size(), part.dim());
    }
    return 0;
  });
}

}  // namespace reidkit::cli
