#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "palign/csv.hpp"
#include "palign/error.hpp"
#include "palign/knn.hpp"
#include "palign/scaling.hpp"
#include "palign/sweep.hpp"
#include "palign/temporal.hpp"

namespace palign::cli {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::size_t resolve_segments(std::size_t requested, const Archive& archive) {
  const std::size_t available = archive.manifest().segment_count;
  if (requested == 0) return available;
  if (requested > available) {
    raise(ErrorKind::parameter, "archive '" + archive.name() + "' has " + std::to_string(available) +
                                    " segments, " + std::to_string(requested) + " requested");
  }
  return requested;
}

std::vector<std::size_t> layers_for(const LayerChoice& choice) {
  if (choice.best) return {};
  return {choice.index};
}

Matrix features(const Archive& archive, std::size_t layer, std::size_t segments) {
  return mean_segments(archive.load_layer(layer), segments);
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  for (const auto& field : csv::split(text, ',')) {
    const auto k = csv::parse_int(field, "--ks");
    if (k < 1) raise(ErrorKind::parameter, "--ks entries must be >= 1");
    ks.push_back(static_cast<std::size_t>(k));
  }
  if (ks.empty()) raise(ErrorKind::parameter, "--ks needs at least one value");
  return ks;
}

// Picks the layer pair for probes that need a single pair: explicit indices
// are used as given, "best" sides are swept at `k`.
LayerPair choose_layers(const Archive& ax, const Archive& ay, const LayerChoice& cx,
                        const LayerChoice& cy, std::size_t seg_x, std::size_t seg_y,
                        const SweepOptions& opts, std::optional<LayerPairMatrix>& sweep) {
  const auto lx = layers_for(cx);
  const auto ly = layers_for(cy);
  if (!cx.best && !cy.best) {
    for (const auto& [a, l] : {std::pair(&ax, cx.index), std::pair(&ay, cy.index)}) {
      if (l >= a->manifest().layer_count) {
        raise(ErrorKind::index, "layer " + std::to_string(l) + " out of range for archive '" +
                                    a->name() + "'");
      }
    }
    return {cx.index, cy.index, 0.0};
  }
  sweep = sweep_layers(ax, ay, aggregation_for_segments(seg_x), aggregation_for_segments(seg_y),
                       opts, lx, ly);
  return sweep->best();
}

}  // namespace

LayerChoice parse_layer_choice(const std::string& text) {
  if (text == "best") return {true, 0};
  const auto v = csv::parse_int(text, "layer (expected an index or 'best')");
  if (v < 0) raise(ErrorKind::parameter, "layer index must be >= 0");
  return {false, static_cast<std::size_t>(v)};
}

RunReport cmd_align(const AlignOptions& o) {
  const auto start = Clock::now();
  const Metric metric = parse_metric(o.metric);
  const LayerChoice cx = parse_layer_choice(o.layer_x);
  const LayerChoice cy = parse_layer_choice(o.layer_y);
  const Archive ax = Archive::open(o.x);
  const Archive ay = Archive::open(o.y);
  const std::size_t seg_x = resolve_segments(o.segments_x, ax);
  const std::size_t seg_y = resolve_segments(o.segments_y, ay);

  const SweepOptions opts{o.k, metric, o.threads};
  const auto lx = layers_for(cx);
  const auto ly = layers_for(cy);
  const auto pairs = sweep_layers(ax, ay, aggregation_for_segments(seg_x),
                                  aggregation_for_segments(seg_y), opts, lx, ly);

  RunReport report;
  report.command = "align";
  report.params = {{"x", o.x},           {"y", o.y},
                   {"k", o.k},           {"metric", o.metric},
                   {"layer-x", o.layer_x}, {"layer-y", o.layer_y},
                   {"segments-x", seg_x}, {"segments-y", seg_y}};
  report.inputs.push_back(summarize_archive(ax, "x"));
  report.inputs.push_back(summarize_archive(ay, "y"));
  auto& r = report.result;
  r["score"] = pairs.best().score;
  r["k"] = o.k;
  r["metric"] = std::string(to_string(metric));
  r["n"] = ax.manifest().item_count;
  r["layer_x"] = pairs.best().layer_x;
  r["layer_y"] = pairs.best().layer_y;
  r["segments_x"] = seg_x;
  r["segments_y"] = seg_y;
  if (cx.best || cy.best) r["layer_pairs"] = layer_pairs_to_json(pairs);
  report.wall_time_ms = elapsed_ms(start);
  write_report(o.out, report);
  return report;
}

RunReport cmd_matrix(const MatrixOptions& o) {
  const auto start = Clock::now();
  const Metric metric = parse_metric(o.metric);
  const auto rows = open_archive_dir(o.vision_dir);
  const auto cols = open_archive_dir(o.text_dir);
  const auto mm = model_matrix(rows, cols, {o.k, metric, o.threads}, o.segments);

  std::ostringstream table;
  table << "vision";
  for (const auto& id : mm.col_ids) table << ',' << id;
  table << '\n';
  for (std::size_t r = 0; r < mm.row_ids.size(); ++r) {
    table << mm.row_ids[r];
    for (std::size_t c = 0; c < mm.col_ids.size(); ++c) table << ',' << csv::format_double(mm.at(r, c).score);
    table << '\n';
  }
  write_text_file(o.out_prefix + ".csv", table.str());

  RunReport report;
  report.command = "matrix";
  report.params = {{"vision-dir", o.vision_dir}, {"text-dir", o.text_dir}, {"k", o.k},
                   {"metric", o.metric},         {"segments", o.segments}};
  for (const auto& a : rows) report.inputs.push_back(summarize_archive(a, "row"));
  for (const auto& a : cols) report.inputs.push_back(summarize_archive(a, "col"));
  Json cells = Json::array();
  for (std::size_t r = 0; r < mm.row_ids.size(); ++r) {
    for (std::size_t c = 0; c < mm.col_ids.size(); ++c) {
      const auto& cell = mm.at(r, c);
      cells.push_back({{"row", mm.row_ids[r]}, {"col", mm.col_ids[c]}, {"score", cell.score},
                       {"layer_x", cell.layer_x}, {"layer_y", cell.layer_y}});
    }
  }
  report.result = {{"rows", mm.row_ids}, {"cols", mm.col_ids}, {"k", o.k},
                   {"metric", std::string(to_string(metric))}, {"cells", std::move(cells)}};
  report.wall_time_ms = elapsed_ms(start);
  write_report(o.out_prefix + ".json", report);
  return report;
}

RunReport cmd_fit_scaling(const FitScalingOptions& o) {
  const auto start = Clock::now();
  std::ifstream in(o.grid, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot read grid file '" + o.grid + "'");
  const ScoreGrid grid = read_score_grid_csv(in);

  FitOptions options;
  options.restarts = o.restarts;
  options.seed = o.seed;
  options.threads = o.threads;
  const auto fit = fit_scaling_law(grid, options);

  RunReport report;
  report.command = "fit-scaling";
  report.params = {{"grid", o.grid}, {"restarts", o.restarts}, {"seed", o.seed}};
  report.inputs.push_back({{"role", "grid"}, {"path", o.grid}, {"points", grid.points.size()}});
  auto& r = report.result;
  r["s_inf"] = fit.law.s_inf;
  r["c_f"] = fit.law.c_f;
  r["alpha"] = fit.law.alpha;
  r["c_c"] = fit.law.c_c;
  r["beta"] = fit.law.beta;
  r["r2"] = fit.r2;
  r["residual_norm"] = fit.residual_norm;
  r["converged"] = fit.converged;
  r["iterations"] = fit.iterations;
  r["degenerate"] = fit.degenerate;
  r["restart"] = fit.restart;

  std::ostringstream table;
  table << "n_f,n_c,score,predicted\n";
  Json points = Json::array();
  for (const auto& pt : grid.points) {
    const double predicted =
        predict_score(fit.law, static_cast<double>(pt.n_f), static_cast<double>(pt.n_c)).score;
    points.push_back({{"n_f", pt.n_f}, {"n_c", pt.n_c}, {"score", pt.score}, {"predicted", predicted}});
    table << pt.n_f << ',' << pt.n_c << ',' << csv::format_double(pt.score) << ','
          << csv::format_double(predicted) << '\n';
  }
  r["points"] = std::move(points);
  report.wall_time_ms = elapsed_ms(start);
  write_report(o.out, report);
  if (!o.csv.empty()) write_text_file(o.csv, table.str());
  return report;
}

RunReport cmd_retrieval(const RetrievalOptions& o) {
  const auto start = Clock::now();
  const Archive train = Archive::open(o.train);
  const Archive test = Archive::open(o.test);
  if (train.manifest().dim != test.manifest().dim) {
    raise(ErrorKind::parameter, "train and test archives differ in embedding width");
  }
  std::size_t layer = 0;
  if (o.layer == "last") {
    if (train.manifest().layer_count != test.manifest().layer_count) {
      raise(ErrorKind::parameter, "'last' layer is ambiguous: archives differ in layer count");
    }
    layer = train.manifest().layer_count - 1;
  } else {
    const auto v = csv::parse_int(o.layer, "--layer (expected an index or 'last')");
    if (v < 0) raise(ErrorKind::parameter, "layer index must be >= 0");
    layer = static_cast<std::size_t>(v);
  }
  const std::size_t seg_train = resolve_segments(o.segments, train);
  const std::size_t seg_test = resolve_segments(o.segments, test);

  const auto train_names = read_labels_csv(o.train_labels, train.manifest().item_ids);
  const auto test_names = read_labels_csv(o.test_labels, test.manifest().item_ids);
  // Class ids follow the lexicographic order of label names, so vote ties go
  // to the alphabetically first label.
  std::map<std::string, int> class_of;
  for (const auto& name : train_names) class_of.emplace(name, 0);
  for (const auto& name : test_names) class_of.emplace(name, 0);
  std::vector<std::string> classes;
  for (auto& [name, id] : class_of) {
    id = static_cast<int>(classes.size());
    classes.push_back(name);
  }
  std::vector<int> train_labels, test_labels;
  for (const auto& name : train_names) train_labels.push_back(class_of.at(name));
  for (const auto& name : test_names) test_labels.push_back(class_of.at(name));

  const Matrix train_x = features(train, layer, seg_train);
  const Matrix test_x = features(test, layer, seg_test);
  const auto predicted = weighted_knn_predict(train_x, train_labels, test_x, o.k, o.tau, o.threads);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == test_labels[i];
  const double accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());

  RunReport report;
  report.command = "retrieval";
  report.params = {{"train", o.train}, {"train-labels", o.train_labels}, {"test", o.test},
                   {"test-labels", o.test_labels}, {"k", o.k}, {"tau", o.tau},
                   {"layer", o.layer}, {"segments", o.segments}};
  report.inputs.push_back(summarize_archive(train, "train"));
  report.inputs.push_back(summarize_archive(test, "test"));
  report.result = {{"accuracy", accuracy}, {"correct", correct}, {"n_test", predicted.size()},
                   {"n_train", train_labels.size()}, {"k", o.k}, {"tau", o.tau},
                   {"layer", layer}, {"classes", classes}};
  report.wall_time_ms = elapsed_ms(start);
  write_report(o.out, report);
  if (!o.csv.empty()) {
    std::ostringstream table;
    table << "item_id,label,predicted\n";
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      table << test.manifest().item_ids[i] << ',' << test_names[i] << ','
            << classes[static_cast<std::size_t>(predicted[i])] << '\n';
    }
    write_text_file(o.csv, table.str());
  }
  return report;
}

RunReport cmd_temporal(const TemporalOptions& o) {
  const auto start = Clock::now();
  const Metric metric = parse_metric(o.metric);
  const LayerChoice cx = parse_layer_choice(o.layer_x);
  const LayerChoice cy = parse_layer_choice(o.layer_y);
  const Archive video = Archive::open(o.video);
  const Archive pos = Archive::open(o.pos);
  const Archive neg = Archive::open(o.neg);
  require_paired(video, pos);
  require_paired(pos, neg);
  if (pos.manifest().layer_count != neg.manifest().layer_count ||
      pos.manifest().dim != neg.manifest().dim) {
    raise(ErrorKind::parameter, "positive and negative text archives must share layer count and width");
  }
  const std::size_t seg = resolve_segments(o.segments, video);

  std::optional<LayerPairMatrix> sweep;
  const SweepOptions opts{o.k, metric, o.threads};
  const LayerPair chosen = choose_layers(video, pos, cx, cy, seg, 1, opts, sweep);

  const Matrix v = features(video, chosen.layer_x, seg);
  const Matrix p = features(pos, chosen.layer_y, 1);
  const Matrix n = features(neg, chosen.layer_y, 1);
  const auto probe = negative_alignment(v, p, n, o.k, metric, o.threads);

  RunReport report;
  report.command = "temporal";
  report.params = {{"video", o.video}, {"pos", o.pos},         {"neg", o.neg},
                   {"k", o.k},         {"metric", o.metric},   {"layer-x", o.layer_x},
                   {"layer-y", o.layer_y}, {"segments", seg}, {"groups", o.groups}};
  report.inputs.push_back(summarize_archive(video, "video"));
  report.inputs.push_back(summarize_archive(pos, "pos"));
  report.inputs.push_back(summarize_archive(neg, "neg"));
  auto& r = report.result;
  r["positive_score"] = probe.positive_score;
  r["negative_score"] = probe.negative_score;
  r["drop"] = probe.drop;
  r["k"] = probe.k;
  r["n"] = probe.n;
  r["layer_x"] = chosen.layer_x;
  r["layer_y"] = chosen.layer_y;
  r["layer_selection"] = sweep ? "best" : "fixed";
  if (sweep) r["layer_pairs"] = layer_pairs_to_json(*sweep);

  if (!o.groups.empty()) {
    std::ifstream in(o.groups, std::ios::binary);
    if (!in) raise(ErrorKind::io, "cannot read groups file '" + o.groups + "'");
    const auto groups = read_related_groups_csv(in);
    const auto ranking = related_ranking(p, groups, metric);
    Json ranked = Json::array();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      ranked.push_back({{"anchor", groups[g].anchor}, {"order", ranking.orders[g]}});
    }
    r["related_ranking"] = {{"groups", std::move(ranked)},
                            {"first_slot_counts", ranking.first_slot_counts}};
  }
  report.wall_time_ms = elapsed_ms(start);
  write_report(o.out, report);
  if (!o.csv.empty()) {
    write_text_file(o.csv, "k,positive,negative,drop\n" + std::to_string(probe.k) + ',' +
                               csv::format_double(probe.positive_score) + ',' +
                               csv::format_double(probe.negative_score) + ',' +
                               csv::format_double(probe.drop) + '\n');
  }
  return report;
}

RunReport cmd_curve(const CurveOptions& o) {
  const auto start = Clock::now();
  const Metric metric = parse_metric(o.metric);
  const auto ks = parse_ks(o.ks);
  const LayerChoice cx = parse_layer_choice(o.layer_x);
  const LayerChoice cy = parse_layer_choice(o.layer_y);
  const Archive ax = Archive::open(o.x);
  const Archive ay = Archive::open(o.y);
  require_paired(ax, ay);
  const std::size_t seg_x = resolve_segments(o.segments_x, ax);
  const std::size_t seg_y = resolve_segments(0, ay);

  std::optional<LayerPairMatrix> sweep;
  const LayerPair chosen =
      choose_layers(ax, ay, cx, cy, seg_x, seg_y, {ks.front(), metric, o.threads}, sweep);
  const auto curve = alignment_curve(features(ax, chosen.layer_x, seg_x),
                                     features(ay, chosen.layer_y, seg_y), ks, metric, o.threads);

  RunReport report;
  report.command = "curve";
  report.params = {{"x", o.x},           {"y", o.y},
                   {"ks", o.ks},         {"metric", o.metric},
                   {"layer-x", o.layer_x}, {"layer-y", o.layer_y},
                   {"segments-x", seg_x}};
  report.inputs.push_back(summarize_archive(ax, "x"));
  report.inputs.push_back(summarize_archive(ay, "y"));
  Json points = Json::array();
  std::ostringstream table;
  table << "k,score\n";
  for (const auto& pt : curve) {
    points.push_back({{"k", pt.k}, {"score", pt.score}});
    table << pt.k << ',' << csv::format_double(pt.score) << '\n';
  }
  report.result = {{"layer_x", chosen.layer_x}, {"layer_y", chosen.layer_y},
                   {"layer_selection", sweep ? "best" : "fixed"},
                   {"selection_k", ks.front()}, {"metric", std::string(to_string(metric))},
                   {"curve", std::move(points)}};
  report.wall_time_ms = elapsed_ms(start);
  write_report(o.out, report);
  if (!o.csv.empty()) write_text_file(o.csv, table.str());
  return report;
}

}  // namespace palign::cli
