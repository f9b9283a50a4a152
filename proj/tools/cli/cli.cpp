#include "cli.hpp"

#include <CLI11.hpp>

#include "commands.hpp"
#include "palign/csv.hpp"
#include "palign/error.hpp"

namespace palign::cli {
namespace {

void add_threads(CLI::App* cmd, std::size_t& threads) {
  cmd->add_option("--threads", threads, "Worker threads (0 = PLATONIC_ALIGN_THREADS or hardware)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mutual k-NN representation alignment toolkit", "palign"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  AlignOptions align;
  auto* c_align = app.add_subcommand("align", "Alignment of two archives (optionally sweeping layers)");
  c_align->add_option("--x", align.x, "First archive")->required();
  c_align->add_option("--y", align.y, "Second archive")->required();
  c_align->add_option("--k", align.k, "Neighbors per item")->capture_default_str();
  c_align->add_option("--metric", align.metric, "cosine or euclidean")->capture_default_str();
  c_align->add_option("--layer-x", align.layer_x, "Layer index or 'best'")->capture_default_str();
  c_align->add_option("--layer-y", align.layer_y, "Layer index or 'best'")->capture_default_str();
  c_align->add_option("--segments-x", align.segments_x, "Sub-clips averaged (0 = all)");
  c_align->add_option("--segments-y", align.segments_y, "Sub-clips averaged (0 = all)");
  c_align->add_option("--out", align.out, "Report JSON")->required();
  add_threads(c_align, align.threads);

  MatrixOptions matrix;
  auto* c_matrix = app.add_subcommand("matrix", "Best-layer alignment for every vision x text archive");
  c_matrix->add_option("--vision-dir", matrix.vision_dir)->required();
  c_matrix->add_option("--text-dir", matrix.text_dir)->required();
  c_matrix->add_option("--k", matrix.k)->capture_default_str();
  c_matrix->add_option("--metric", matrix.metric)->capture_default_str();
  c_matrix->add_option("--segments", matrix.segments, "Sub-clips averaged (0 = all)");
  c_matrix->add_option("--out-prefix", matrix.out_prefix, "Writes <prefix>.csv and <prefix>.json")
      ->required();
  add_threads(c_matrix, matrix.threads);

  FitScalingOptions fit;
  auto* c_fit = app.add_subcommand("fit-scaling", "Fit the frames x captions saturation law");
  c_fit->add_option("--grid", fit.grid, "CSV with header n_f,n_c,score")->required();
  c_fit->add_option("--restarts", fit.restarts)->capture_default_str();
  c_fit->add_option("--seed", fit.seed)->capture_default_str();
  c_fit->add_option("--out", fit.out, "Report JSON")->required();
  c_fit->add_option("--csv", fit.csv, "Per-point predictions");
  add_threads(c_fit, fit.threads);

  RetrievalOptions ret;
  auto* c_ret = app.add_subcommand("retrieval", "Weighted k-NN classification accuracy");
  c_ret->add_option("--train", ret.train)->required();
  c_ret->add_option("--train-labels", ret.train_labels, "CSV item_id,label")->required();
  c_ret->add_option("--test", ret.test)->required();
  c_ret->add_option("--test-labels", ret.test_labels, "CSV item_id,label")->required();
  c_ret->add_option("--k", ret.k)->capture_default_str();
  c_ret->add_option("--tau", ret.tau)->capture_default_str();
  c_ret->add_option("--layer", ret.layer, "Layer index or 'last'")->capture_default_str();
  c_ret->add_option("--segments", ret.segments, "Sub-clips averaged (0 = all)");
  c_ret->add_option("--out", ret.out, "Report JSON")->required();
  c_ret->add_option("--csv", ret.csv, "Per-item predictions");
  add_threads(c_ret, ret.threads);

  TemporalOptions tmp;
  auto* c_tmp = app.add_subcommand("temporal", "Reorder-negative probe");
  c_tmp->add_option("--video", tmp.video)->required();
  c_tmp->add_option("--pos", tmp.pos, "Captions in true event order")->required();
  c_tmp->add_option("--neg", tmp.neg, "Captions with events reordered")->required();
  c_tmp->add_option("--groups", tmp.groups, "CSV anchor,related for the related-caption ranking");
  c_tmp->add_option("--k", tmp.k)->capture_default_str();
  c_tmp->add_option("--metric", tmp.metric)->capture_default_str();
  c_tmp->add_option("--layer-x", tmp.layer_x)->capture_default_str();
  c_tmp->add_option("--layer-y", tmp.layer_y)->capture_default_str();
  c_tmp->add_option("--segments", tmp.segments, "Sub-clips averaged (0 = all)");
  c_tmp->add_option("--out", tmp.out, "Report JSON")->required();
  c_tmp->add_option("--csv", tmp.csv);
  add_threads(c_tmp, tmp.threads);

  CurveOptions curve;
  auto* c_curve = app.add_subcommand("curve", "Alignment as a function of k");
  c_curve->add_option("--x", curve.x)->required();
  c_curve->add_option("--y", curve.y)->required();
  c_curve->add_option("--ks", curve.ks, "Comma-separated k values")->required();
  c_curve->add_option("--metric", curve.metric)->capture_default_str();
  c_curve->add_option("--layer-x", curve.layer_x)->capture_default_str();
  c_curve->add_option("--layer-y", curve.layer_y)->capture_default_str();
  c_curve->add_option("--segments-x", curve.segments_x, "Sub-clips averaged (0 = all)");
  c_curve->add_option("--out", curve.out, "Report JSON")->required();
  c_curve->add_option("--csv", curve.csv, "k,score table");
  add_threads(c_curve, curve.threads);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_align->parsed()) {
      const auto r = cmd_align(align);
      out << "score " << csv::format_double(r.result["score"].get<double>(), 6) << " (layers "
          << r.result["layer_x"].get<std::size_t>() << ", " << r.result["layer_y"].get<std::size_t>()
          << ")\n";
    } else if (c_matrix->parsed()) {
      cmd_matrix(matrix);
      out << "wrote " << matrix.out_prefix << ".csv and " << matrix.out_prefix << ".json\n";
    } else if (c_fit->parsed()) {
      const auto r = cmd_fit_scaling(fit);
      out << "r2 " << csv::format_double(r.result["r2"].get<double>(), 6) << '\n';
    } else if (c_ret->parsed()) {
      const auto r = cmd_retrieval(ret);
      out << "accuracy " << csv::format_double(r.result["accuracy"].get<double>(), 6) << '\n';
    } else if (c_tmp->parsed()) {
      const auto r = cmd_temporal(tmp);
      out << "drop " << csv::format_double(r.result["drop"].get<double>(), 6) << '\n';
    } else if (c_curve->parsed()) {
      cmd_curve(curve);
      out << "wrote " << curve.out << '\n';
    }
  } catch (const Error& e) {
    err << "palign: " << e.what() << '\n';
    return e.kind() == ErrorKind::io || e.kind() == ErrorKind::format ? kExitIo : kExitUsage;
  } catch (const std::exception& e) {
    err << "palign: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace palign::cli
