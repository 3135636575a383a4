// Copyright 2026 The gnneval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gnneval/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gnneval/error.hpp"
#include "parallel.hpp"
#include "text_io.hpp"

namespace fs = std::filesystem;

namespace gnneval {

// ---------------------------------------------------------------------------
// key = value config

KeyValueConfig KeyValueConfig::parse(const std::string& text_in) {
  KeyValueConfig kv;
  text::LineReader in(text_in);
  std::string_view line;
  while (in.next(line)) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto toks = text::split_ws(line);
    if (toks.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(in.line_number()) + ": expected key = value");
    }
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
      return std::string(s);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(in.line_number()) + ": empty key");
    kv.values_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const fs::path& path) {
  try {
    return parse(text::read_file(path));
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) {
    const auto toks = text::split_ws(cur);
    if (toks.size() == 1) {
      out.emplace_back(toks[0]);
    } else if (toks.size() > 1) {
      throw ConfigError("list item '" + cur + "' contains whitespace");
    }
  }
  return out;
}

template <typename T, typename Parse>
T convert(const std::string& key, const std::string& value, Parse parse) {
  try {
    return parse(value);
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + value);
  }
}

double to_double(const std::string& key, const std::string& v) {
  return convert<double>(key, v, [](const std::string& s) { return text::parse_double(s, 0); });
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  return convert<std::int64_t>(key, v, [](const std::string& s) { return text::parse_int(s, 0); });
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  return convert<std::uint64_t>(key, v, [](const std::string& s) { return text::parse_u64(s, 0); });
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for '" + key + "': " + v);
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + text::format_g9(xs[i]);
  return out;
}

std::string recipe_name(std::string recipe) {
  std::replace(recipe.begin(), recipe.end(), ':', '_');
  return recipe;
}

std::string cell_name(Arch arch, std::uint64_t seed) {
  return std::string(arch_name(arch)) + "_s" + std::to_string(seed);
}

void log(const StageOptions& opts, const std::string& msg) {
  if (opts.log) opts.log(msg);
}

}  // namespace

RunConfig RunConfig::from(const KeyValueConfig& kv, const fs::path& base_dir) {
  RunConfig c;
  std::set<std::string> used;
  auto get = [&](const std::string& key) {
    used.insert(key);
    return kv.get(key);
  };
  auto path_of = [&](const std::string& v) {
    fs::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };

  if (auto v = get("out")) c.out_dir = path_of(*v);
  if (auto v = get("source")) {
    c.source = path_of(*v);
    c.synthetic = false;
    c.source_name = c.source.stem().string();
  }
  if (auto v = get("source_name")) c.source_name = *v;
  if (auto v = get("split")) c.split = path_of(*v);
  if (auto v = get("targets")) {
    for (const auto& item : split_list(*v)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        const fs::path p = path_of(item);
        c.targets.push_back({p.stem().string(), p});
      } else {
        c.targets.push_back({item.substr(0, colon), path_of(item.substr(colon + 1))});
      }
    }
  }
  if (!c.synthetic && c.split.empty()) throw ConfigError("'split' is required when 'source' is set");
  if (!c.synthetic && c.targets.empty()) throw ConfigError("'targets' is required when 'source' is set");

  if (auto v = get("archs")) {
    c.archs.clear();
    for (const auto& a : split_list(*v)) {
      try {
        c.archs.push_back(parse_arch(a));
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (auto v = get("seeds")) {
    c.seeds.clear();
    for (const auto& s : split_list(*v)) c.seeds.push_back(to_u64("seeds", s));
  }
  if (c.archs.empty() || c.seeds.empty()) throw ConfigError("archs and seeds must be nonempty");
  if (auto v = get("max_epochs")) c.max_epochs = static_cast<int>(to_int("max_epochs", *v));
  if (auto v = get("patience")) c.patience = static_cast<int>(to_int("patience", *v));
  if (auto v = get("hidden_dim")) c.hidden_dim = static_cast<std::size_t>(to_int("hidden_dim", *v));
  if (auto v = get("embed_dim")) c.embed_dim = static_cast<std::size_t>(to_int("embed_dim", *v));
  for (Arch a : kAllArchs) {
    const std::string n(arch_name(a));
    if (auto v = get("lr." + n)) c.lr[a] = to_double("lr." + n, *v);
    if (auto v = get("wd." + n)) c.wd[a] = to_double("wd." + n, *v);
  }
  if (auto v = get("seed")) c.seed = to_u64("seed", *v);
  if (auto v = get("threads")) c.threads = static_cast<unsigned>(std::max<std::int64_t>(1, to_int("threads", *v)));
  if (auto v = get("heatmap")) c.heatmap = to_bool("heatmap", *v);

  c.augment.num_graphs = 400;
  c.augment.seed = c.seed;
  if (auto v = get("K")) c.augment.num_graphs = static_cast<std::size_t>(to_int("K", *v));
  if (auto v = get("aug.seed")) c.augment.seed = to_u64("aug.seed", *v);
  if (auto v = get("aug.chain_length")) c.augment.chain_length = static_cast<std::size_t>(to_int("aug.chain_length", *v));
  if (auto v = get("aug.weights")) {
    const auto ws = split_list(*v);
    if (ws.size() != 4) throw ConfigError("aug.weights needs 4 values");
    for (std::size_t i = 0; i < 4; ++i) c.augment.weights[i] = to_double("aug.weights", ws[i]);
  }
  for (AugmentOp op : kAllAugmentOps) {
    const std::string key = "aug.p_range." + std::string(augment_op_name(op));
    if (auto v = get(key)) {
      const auto r = split_list(*v);
      if (r.size() != 2) throw ConfigError(key + " needs lo,hi");
      c.augment.p_ranges[static_cast<std::size_t>(op)] = {to_double(key, r[0]), to_double(key, r[1])};
    }
  }
  try {
    c.augment.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  if (auto v = get("eval.hidden_dim")) c.evaluator.hidden_dim = static_cast<std::size_t>(to_int("eval.hidden_dim", *v));
  if (auto v = get("eval.lr")) c.evaluator.lr = to_double("eval.lr", *v);
  if (auto v = get("eval.wd")) c.evaluator.wd = to_double("eval.wd", *v);
  if (auto v = get("eval.epochs")) c.evaluator.epochs = static_cast<int>(to_int("eval.epochs", *v));
  if (auto v = get("eval.val_fraction")) c.evaluator.val_fraction = to_double("eval.val_fraction", *v);
  if (auto v = get("eval.seed")) c.evaluator.seed = to_u64("eval.seed", *v);
  if (auto v = get("eval.head")) {
    if (*v == "sigmoid") c.evaluator.head = EvaluatorHead::Sigmoid;
    else if (*v == "linear") c.evaluator.head = EvaluatorHead::Linear;
    else throw ConfigError("eval.head must be sigmoid or linear");
  }
  if (auto v = get("disc.norm")) {
    if (*v == "row") c.disc_norm = DiscNorm::RowCosine;
    else if (*v == "matrix") c.disc_norm = DiscNorm::MatrixNorm;
    else throw ConfigError("disc.norm must be row or matrix");
  }

  if (auto v = get("baseline.atc")) c.baselines.atc = to_bool("baseline.atc", *v);
  if (auto v = get("baseline.atc_calibrated")) c.baselines.atc_calibrated = to_bool("baseline.atc_calibrated", *v);
  if (auto v = get("baseline.autoeval_g")) c.baselines.autoeval_g = to_bool("baseline.autoeval_g", *v);
  if (auto v = get("baseline.taus")) {
    c.baselines.taus.clear();
    for (const auto& t : split_list(*v)) {
      const double tau = to_double("baseline.taus", t);
      if (!(tau > 0 && tau < 1)) throw ConfigError("baseline.taus must lie in (0, 1)");
      c.baselines.taus.push_back(tau);
    }
  }
  if (auto v = get("baseline.mmd_kernel")) {
    if (*v == "linear") c.baselines.mmd_kernel = MmdKernel::Linear;
    else if (*v == "rbf") c.baselines.mmd_kernel = MmdKernel::Rbf;
    else throw ConfigError("baseline.mmd_kernel must be linear or rbf");
  }

  if (auto v = get("sbm.nodes")) c.sbm.nodes = static_cast<std::size_t>(to_int("sbm.nodes", *v));
  if (auto v = get("sbm.classes")) c.sbm.classes = static_cast<int>(to_int("sbm.classes", *v));
  if (auto v = get("sbm.feature_dim")) c.sbm.feature_dim = static_cast<std::size_t>(to_int("sbm.feature_dim", *v));
  if (auto v = get("sbm.p_in")) c.sbm.p_in = to_double("sbm.p_in", *v);
  if (auto v = get("sbm.p_out")) c.sbm.p_out = to_double("sbm.p_out", *v);
  if (auto v = get("sbm.mean_scale")) c.sbm.mean_scale = to_double("sbm.mean_scale", *v);
  if (auto v = get("sbm.noise")) c.sbm.noise = to_double("sbm.noise", *v);
  if (auto v = get("sbm.train_fraction")) c.sbm.train_fraction = to_double("sbm.train_fraction", *v);
  if (auto v = get("sbm.val_fraction")) c.sbm.val_fraction = to_double("sbm.val_fraction", *v);
  if (auto v = get("sbm.targets")) c.sbm.targets = split_list(*v);
  if (c.sbm.classes <= 0 || c.sbm.nodes < static_cast<std::size_t>(c.sbm.classes) || c.sbm.feature_dim == 0) {
    throw ConfigError("sbm.nodes/classes/feature_dim out of range");
  }

  for (const auto& [key, _] : kv.values()) {
    if (!used.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  return from(KeyValueConfig::load(path), path.parent_path());
}

fs::path RunConfig::source_path() const {
  return synthetic ? out_dir / "data" / "source.gtxt" : source;
}

fs::path RunConfig::split_path() const {
  return synthetic ? out_dir / "data" / "source.split" : split;
}

std::vector<TargetSpec> RunConfig::target_specs() const {
  if (!synthetic) return targets;
  std::vector<TargetSpec> out;
  for (const auto& r : sbm.targets) {
    const auto name = recipe_name(r);
    out.push_back({name, out_dir / "data" / ("target_" + name + ".gtxt")});
  }
  return out;
}

std::string RunConfig::materialize() const {
  std::map<std::string, std::string> kv;
  kv["out"] = out_dir.generic_string();
  kv["source_name"] = source_name;
  // Synthetic runs derive their data paths from out and the sbm.* keys.
  if (!synthetic) {
    kv["source"] = source.generic_string();
    kv["split"] = split.generic_string();
    std::string t;
    for (const auto& spec : targets) t += (t.empty() ? "" : ",") + spec.name + ":" + spec.path.generic_string();
    kv["targets"] = t;
  }
  std::string archs_s, seeds_s;
  for (Arch a : archs) archs_s += (archs_s.empty() ? "" : ",") + std::string(arch_name(a));
  for (auto s : seeds) seeds_s += (seeds_s.empty() ? "" : ",") + std::to_string(s);
  kv["archs"] = archs_s;
  kv["seeds"] = seeds_s;
  kv["max_epochs"] = std::to_string(max_epochs);
  kv["patience"] = std::to_string(patience);
  kv["hidden_dim"] = std::to_string(hidden_dim);
  kv["embed_dim"] = std::to_string(embed_dim);
  for (Arch a : kAllArchs) {
    const auto mc = model_config(a, 1, 1, 0);
    kv["lr." + std::string(arch_name(a))] = text::format_g9(mc.lr);
    kv["wd." + std::string(arch_name(a))] = text::format_g9(mc.wd);
  }
  kv["K"] = std::to_string(augment.num_graphs);
  kv["aug.seed"] = std::to_string(augment.seed);
  kv["aug.chain_length"] = std::to_string(augment.chain_length);
  kv["aug.weights"] = join_doubles({augment.weights.begin(), augment.weights.end()});
  for (AugmentOp op : kAllAugmentOps) {
    const auto& r = augment.p_ranges[static_cast<std::size_t>(op)];
    kv["aug.p_range." + std::string(augment_op_name(op))] = join_doubles({r[0], r[1]});
  }
  kv["eval.hidden_dim"] = std::to_string(evaluator.hidden_dim);
  kv["eval.lr"] = text::format_g9(evaluator.lr);
  kv["eval.wd"] = text::format_g9(evaluator.wd);
  kv["eval.epochs"] = std::to_string(evaluator.epochs);
  kv["eval.val_fraction"] = text::format_g9(evaluator.val_fraction);
  kv["eval.seed"] = std::to_string(evaluator.seed);
  kv["eval.head"] = evaluator.head == EvaluatorHead::Sigmoid ? "sigmoid" : "linear";
  kv["disc.norm"] = disc_norm == DiscNorm::RowCosine ? "row" : "matrix";
  kv["baseline.atc"] = baselines.atc ? "true" : "false";
  kv["baseline.atc_calibrated"] = baselines.atc_calibrated ? "true" : "false";
  kv["baseline.autoeval_g"] = baselines.autoeval_g ? "true" : "false";
  kv["baseline.taus"] = join_doubles(baselines.taus);
  kv["baseline.mmd_kernel"] = std::string(kernel_name(baselines.mmd_kernel));
  if (synthetic) {
    kv["sbm.nodes"] = std::to_string(sbm.nodes);
    kv["sbm.classes"] = std::to_string(sbm.classes);
    kv["sbm.feature_dim"] = std::to_string(sbm.feature_dim);
    kv["sbm.p_in"] = text::format_g9(sbm.p_in);
    kv["sbm.p_out"] = text::format_g9(sbm.p_out);
    kv["sbm.mean_scale"] = text::format_g9(sbm.mean_scale);
    kv["sbm.noise"] = text::format_g9(sbm.noise);
    kv["sbm.train_fraction"] = text::format_g9(sbm.train_fraction);
    kv["sbm.val_fraction"] = text::format_g9(sbm.val_fraction);
    std::string ts;
    for (const auto& r : sbm.targets) ts += (ts.empty() ? "" : ",") + r;
    kv["sbm.targets"] = ts;
  }
  kv["heatmap"] = heatmap ? "true" : "false";
  kv["seed"] = std::to_string(seed);
  kv["threads"] = std::to_string(threads);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + '\n';
  return out;
}

ModelConfig RunConfig::model_config(Arch arch, std::size_t input_dim, int num_classes,
                                    std::uint64_t model_seed) const {
  ModelConfig mc = default_model_config(arch, input_dim, num_classes, model_seed);
  if (auto it = lr.find(arch); it != lr.end()) mc.lr = it->second;
  if (auto it = wd.find(arch); it != wd.end()) mc.wd = it->second;
  mc.hidden_dim = hidden_dim;
  mc.out_embed_dim = embed_dim;
  mc.max_epochs = max_epochs;
  mc.patience = patience;
  return mc;
}

fs::path RunConfig::model_path(Arch arch, std::uint64_t s) const {
  return out_dir / "models" / (cell_name(arch, s) + ".ckpt");
}

fs::path RunConfig::disc_dir(Arch arch, std::uint64_t s) const {
  return out_dir / "disc" / cell_name(arch, s);
}

fs::path RunConfig::evaluator_path(Arch arch, std::uint64_t s) const {
  return out_dir / "evaluators" / (cell_name(arch, s) + ".eval");
}

// ---------------------------------------------------------------------------
// results CSV

std::optional<double> ResultRow::abs_error() const {
  if (!truth) return std::nullopt;
  return std::abs(estimate - *truth);
}

std::string format_results(const std::vector<ResultRow>& rows) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& r : rows) {
    const auto err = r.abs_error();
    out += r.method + ',' + r.model + ',' + std::to_string(r.seed) + ',' + r.source + ',' + r.target +
           ',' + text::format_g17(r.estimate) + ',' + (r.truth ? text::format_g17(*r.truth) : "NA") +
           ',' + (err ? text::format_g17(*err) : "NA") + '\n';
  }
  return out;
}

std::vector<ResultRow> parse_results(const std::string& text_in) {
  text::LineReader in(text_in);
  if (in.expect("results header") != kResultsHeader) throw FormatError("unexpected results header", 1);
  std::vector<ResultRow> rows;
  std::string_view line;
  while (in.next(line)) {
    if (text::split_ws(line).empty()) continue;
    std::vector<std::string> f = split_list(std::string(line));
    if (f.size() != 8) throw FormatError("results row needs 8 fields", in.line_number());
    ResultRow r;
    r.method = f[0];
    r.model = f[1];
    r.seed = text::parse_u64(f[2], in.line_number());
    r.source = f[3];
    r.target = f[4];
    r.estimate = text::parse_double(f[5], in.line_number());
    if (f[6] != "NA") r.truth = text::parse_double(f[6], in.line_number());
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// stages

namespace {

Graph load_source(const RunConfig& cfg) {
  return load_graph(cfg.source_path());
}

Split load_source_split(const RunConfig& cfg, const Graph& g) {
  Split s = load_split(cfg.split_path());
  try {
    s.validate(g.num_nodes());
  } catch (const InvalidArgument& e) {
    throw ConfigError("split " + cfg.split_path().string() + ": " + e.what());
  }
  return s;
}

void write_manifest(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  text::write_file(cfg.out_dir / "run_config.txt", cfg.materialize());
}

Graph apply_recipe(const Graph& g, const std::string& recipe, Rng& rng) {
  const auto colon = recipe.find(':');
  const std::string kind = recipe.substr(0, colon);
  const double arg = colon == std::string::npos ? 0.0 : text::parse_double(recipe.substr(colon + 1), 0);
  if (kind == "edge_drop") return edge_drop(g, arg, rng);
  if (kind == "attr_mask") return attr_mask(g, arg, rng);
  if (kind == "noise" || kind == "clean") return g;
  if (kind == "mixed") return attr_mask(edge_drop(g, 0.3, rng), 0.2, rng);
  throw ConfigError("unknown target recipe '" + recipe + "'");
}

double recipe_noise_factor(const std::string& recipe) {
  const auto colon = recipe.find(':');
  const std::string kind = recipe.substr(0, colon);
  if (kind == "noise") return text::parse_double(recipe.substr(colon + 1), 0);
  if (kind == "mixed") return 1.5;
  return 1.0;
}

struct ModelCell {
  Arch arch;
  std::uint64_t seed;
};

std::vector<ModelCell> cells_of(const RunConfig& cfg) {
  std::vector<ModelCell> cells;
  for (Arch a : cfg.archs) {
    for (auto s : cfg.seeds) cells.push_back({a, s});
  }
  return cells;
}

// Cells whose checkpoint exists on disk.
std::vector<ModelCell> trained_cells(const RunConfig& cfg) {
  std::vector<ModelCell> out;
  for (const auto& c : cells_of(cfg)) {
    if (fs::exists(cfg.model_path(c.arch, c.seed))) out.push_back(c);
  }
  return out;
}

std::vector<double> labels_from_manifest(const fs::path& dir) {
  text::LineReader in(text::read_file(dir / "manifest.csv"));
  in.expect("manifest header");
  std::vector<double> labels;
  std::string_view line;
  while (in.next(line)) {
    if (text::split_ws(line).empty()) continue;
    const auto f = split_list(std::string(line));
    if (f.size() != 7) throw FormatError("disc manifest row needs 7 fields", in.line_number());
    labels.push_back(text::parse_double(f[6], in.line_number()));
  }
  return labels;
}

double truth_accuracy(const TrainedModel& model, const Graph& target) {
  const auto pred = embed_and_predict(model, target);
  std::vector<int> yhat, y;
  for (std::size_t i = 0; i < target.num_nodes(); ++i) {
    if (target.labels()[i] == kUnlabeled) continue;
    yhat.push_back(pred.labels[i]);
    y.push_back(target.labels()[i]);
  }
  if (y.empty()) throw ConfigError("--with-truth: target graph has no labels");
  return accuracy(yhat, y);
}

}  // namespace

std::vector<TargetSpec> cmd_gen_sbm(const RunConfig& cfg, const StageOptions& opts) {
  const auto& s = cfg.sbm;
  const fs::path dir = cfg.out_dir / "data";
  fs::create_directories(dir);
  write_manifest(cfg);

  Rng root(cfg.seed);
  Rng means_rng = root.split(0x6d65616e);
  SbmParams params;
  params.p_in = s.p_in;
  params.p_out = s.p_out;
  params.feature_noise = s.noise;
  for (int c = 0; c < s.classes; ++c) {
    std::vector<double> mu(s.feature_dim);
    for (auto& m : mu) m = s.mean_scale * means_rng.normal();
    params.feature_means.push_back(std::move(mu));
    const std::size_t base = s.nodes / static_cast<std::size_t>(s.classes);
    const std::size_t extra = static_cast<std::size_t>(c) < s.nodes % static_cast<std::size_t>(s.classes) ? 1 : 0;
    params.blocks.push_back({base + extra, c});
  }

  const Graph source = generate_sbm(root.split(1).key(), params);
  Rng split_rng = root.split(2);
  const Split split = random_split(source.num_nodes(), s.train_fraction, s.val_fraction, split_rng);
  save_graph(source, cfg.source_path());
  save_split(split, cfg.split_path());
  log(opts, "gen-sbm: source " + std::to_string(source.num_nodes()) + " nodes, " +
                std::to_string(source.num_edges()) + " edges");

  const auto specs = cfg.target_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& recipe = s.targets[i];
    SbmParams tp = params;
    tp.feature_noise = s.noise * recipe_noise_factor(recipe);
    const Graph base = generate_sbm(root.split(1000 + i).key(), tp);
    Rng shift_rng = root.split(2000 + i);
    const Graph target = apply_recipe(base, recipe, shift_rng);
    save_graph(target, specs[i].path);
    log(opts, "gen-sbm: target " + specs[i].name + " " + std::to_string(target.num_edges()) + " edges");
  }
  return specs;
}

std::vector<TrainCell> cmd_train_gnn(const RunConfig& cfg, const StageOptions& opts) {
  const Graph g = load_source(cfg);
  const Split split = load_source_split(cfg, g);
  fs::create_directories(cfg.out_dir / "models");
  write_manifest(cfg);

  const auto cells = cells_of(cfg);
  std::vector<TrainCell> out(cells.size());
  detail::parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    TrainCell& cell = out[i];
    cell.arch = cells[i].arch;
    cell.seed = cells[i].seed;
    try {
      const auto mc = cfg.model_config(cell.arch, g.feature_dim(), g.num_classes(), cell.seed);
      const TrainedModel m = train_classifier(g, split, mc);
      save_model(m, cfg.model_path(cell.arch, cell.seed));
      const auto pred = embed_and_predict(m, g);
      std::size_t hit = 0;
      for (NodeId id : split.test_ids) hit += pred.labels[id] == g.labels()[id] ? 1 : 0;
      cell.ok = true;
      cell.model_id = m.id();
      cell.best_epoch = m.best_epoch();
      cell.val_accuracy = m.best_val_accuracy();
      cell.test_accuracy = split.test_ids.empty() ? 0.0 : double(hit) / double(split.test_ids.size());
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      std::replace(cell.error.begin(), cell.error.end(), ',', ';');
      std::replace(cell.error.begin(), cell.error.end(), '\n', ' ');
    }
  });

  std::string manifest = "arch,seed,status,model_id,best_epoch,val_acc,test_acc\n";
  for (const auto& c : out) {
    manifest += std::string(arch_name(c.arch)) + ',' + std::to_string(c.seed) + ',' +
                (c.ok ? "ok" : "error: " + c.error) + ',' + c.model_id + ',' +
                std::to_string(c.best_epoch) + ',' + text::format_g9(c.val_accuracy) + ',' +
                text::format_g9(c.test_accuracy) + '\n';
    log(opts, "train-gnn: " + cell_name(c.arch, c.seed) +
                  (c.ok ? " val_acc=" + text::format_g9(c.val_accuracy) + " test_acc=" +
                              text::format_g9(c.test_accuracy)
                        : " FAILED: " + c.error));
  }
  text::write_file(cfg.out_dir / "models" / "manifest.csv", manifest);
  if (std::none_of(out.begin(), out.end(), [](const TrainCell& c) { return c.ok; })) {
    throw NumericError("train-gnn: every (arch, seed) cell failed");
  }
  return out;
}

std::map<std::string, DiscSetSummary> cmd_build_discgraphs(const RunConfig& cfg,
                                                           const StageOptions& opts) {
  const Graph g = load_source(cfg);
  const Split split = load_source_split(cfg, g);
  write_manifest(cfg);
  const Graph seed_graph = seed_subgraph(g, split);
  const auto metas = build_meta_set(seed_graph, cfg.augment, cfg.threads);

  fs::create_directories(cfg.meta_dir());
  std::vector<std::string> prov(metas.size());
  for (std::size_t i = 0; i < metas.size(); ++i) {
    const auto& mg = metas[i];
    std::string ops, ps;
    for (std::size_t k = 0; k < mg.ops.size(); ++k) {
      ops += (k ? "+" : "") + std::string(augment_op_name(mg.ops[k]));
      ps += (k ? "+" : "") + text::format_g17(mg.ratios[k]);
    }
    prov[i] = std::to_string(i) + ',' + ops + ',' + ps + ',' + text::hex16(mg.stream_key) + ',' +
              std::to_string(mg.graph.num_nodes()) + ',' + std::to_string(mg.graph.num_edges());
    save_graph(mg.graph, cfg.meta_dir() / ("meta_" + std::to_string(i) + ".gtxt"));
  }
  {
    std::string manifest = "i,ops,ps,seed,N_i,M_i,label\n";
    for (const auto& p : prov) manifest += p + ",pending\n";
    text::write_file(cfg.meta_dir() / "manifest.csv", manifest);
  }
  log(opts, "build-discgraphs: " + std::to_string(metas.size()) + " meta-graphs from a " +
                std::to_string(seed_graph.num_nodes()) + "-node seed subgraph");

  std::map<std::string, DiscSetSummary> summaries;
  for (const auto& cell : trained_cells(cfg)) {
    const TrainedModel model = load_model(cfg.model_path(cell.arch, cell.seed));
    const DiscrepancyContext ctx(model, g, cfg.disc_norm);
    const auto discs = build_disc_set(ctx, metas, cfg.threads);
    const fs::path dir = cfg.disc_dir(cell.arch, cell.seed);
    fs::create_directories(dir);
    std::string manifest = "i,ops,ps,seed,N_i,M_i,label\n";
    std::vector<double> labels;
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < discs.size(); ++i) {
      save_disc(discs[i], dir / ("disc_" + std::to_string(i) + ".disc"));
      manifest += prov[i] + ',' + text::format_g17(*discs[i].label) + '\n';
      labels.push_back(*discs[i].label);
      degenerate += discs[i].degenerate_rows;
    }
    text::write_file(dir / "manifest.csv", manifest);
    DiscSetSummary s;
    s.count = labels.size();
    s.min = *std::min_element(labels.begin(), labels.end());
    s.max = *std::max_element(labels.begin(), labels.end());
    s.mean = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(labels.size());
    double var = 0.0;
    for (double y : labels) var += (y - s.mean) * (y - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(labels.size()));
    text::write_file(dir / "summary.csv", "count,min,max,mean,std\n" + std::to_string(s.count) + ',' +
                                              text::format_g9(s.min) + ',' + text::format_g9(s.max) + ',' +
                                              text::format_g9(s.mean) + ',' + text::format_g9(s.stddev) + '\n');
    summaries[cell_name(cell.arch, cell.seed)] = s;
    log(opts, "build-discgraphs: " + cell_name(cell.arch, cell.seed) + " labels min=" +
                  text::format_g9(s.min) + " mean=" + text::format_g9(s.mean) + " max=" +
                  text::format_g9(s.max));
    if (degenerate > 0) {
      log(opts, "build-discgraphs: warning: " + std::to_string(degenerate) +
                    " zero-norm embedding rows (degenerate embedding)");
    }
  }
  if (summaries.empty()) throw ConfigError("build-discgraphs: no trained checkpoints under " + (cfg.out_dir / "models").string());
  return summaries;
}

std::vector<DiscGraph> load_disc_set(const fs::path& dir) {
  const auto labels = labels_from_manifest(dir);
  std::vector<DiscGraph> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back(load_disc(dir / ("disc_" + std::to_string(i) + ".disc")));
    if (!out.back().label || *out.back().label != labels[i]) {
      throw FormatError("disc_" + std::to_string(i) + ".disc label disagrees with manifest");
    }
  }
  return out;
}

void cmd_train_evaluator(const RunConfig& cfg, const StageOptions& opts) {
  write_manifest(cfg);
  fs::create_directories(cfg.out_dir / "evaluators");
  std::string manifest = "arch,seed,model_id,best_epoch,initial_monitor_mse,best_monitor_mse,final_train_mse\n";
  std::size_t trained = 0;
  for (const auto& cell : trained_cells(cfg)) {
    const fs::path dir = cfg.disc_dir(cell.arch, cell.seed);
    if (!fs::exists(dir / "manifest.csv")) continue;
    const auto discs = load_disc_set(dir);
    EvaluatorConfig ec = cfg.evaluator;
    ec.seed = cfg.evaluator.seed + cell.seed;
    ec.input_dim = 0;
    EvaluatorTrainLog tl;
    const TrainedEvaluator ev = train_evaluator(discs, ec, &tl);
    save_evaluator(ev, cfg.evaluator_path(cell.arch, cell.seed));
    manifest += std::string(arch_name(cell.arch)) + ',' + std::to_string(cell.seed) + ',' + ev.model_id() +
                ',' + std::to_string(tl.best_epoch) + ',' + text::format_g9(tl.initial_monitor_mse) + ',' +
                text::format_g9(tl.best_monitor_mse) + ',' + text::format_g9(tl.train_mse.back()) + '\n';
    log(opts, "train-evaluator: " + cell_name(cell.arch, cell.seed) + " best_epoch=" +
                  std::to_string(tl.best_epoch) + " monitor_mse=" + text::format_g9(tl.best_monitor_mse));
    ++trained;
  }
  if (trained == 0) throw ConfigError("train-evaluator: no DiscGraph sets found under " + (cfg.out_dir / "disc").string());
  text::write_file(cfg.out_dir / "evaluators" / "manifest.csv", manifest);
}

std::vector<ResultRow> cmd_estimate(const RunConfig& cfg, const StageOptions& opts) {
  write_manifest(cfg);
  const Graph g = load_source(cfg);
  std::vector<std::pair<TargetSpec, Graph>> targets;
  for (const auto& spec : cfg.target_specs()) {
    Graph t = load_graph(spec.path);
    targets.emplace_back(spec, opts.with_truth ? std::move(t) : t.without_labels());
  }
  std::vector<ResultRow> rows;
  for (const auto& cell : trained_cells(cfg)) {
    const fs::path ev_path = cfg.evaluator_path(cell.arch, cell.seed);
    if (!fs::exists(ev_path)) continue;
    const TrainedModel model = load_model(cfg.model_path(cell.arch, cell.seed));
    const TrainedEvaluator ev = load_evaluator(ev_path);
    if (ev.model_id() != model.id() || ev.train_graph_id() != model.source_graph_id()) {
      throw ConfigError("evaluator " + ev_path.string() + " is bound to " + ev.model_id() +
                        ", checkpoint is " + model.id());
    }
    const DiscrepancyContext ctx(model, g, cfg.disc_norm);
    for (const auto& [spec, target] : targets) {
      const DiscGraph d = build_inference_discgraph(ctx, target, spec.name);
      ResultRow r{"GNNEvaluator", std::string(arch_name(cell.arch)), cell.seed, cfg.source_name,
                  spec.name, estimate_accuracy(ev, d), std::nullopt};
      if (opts.with_truth) r.truth = truth_accuracy(model, target);
      if (cfg.heatmap) {
        const fs::path dir = cfg.out_dir / "targets" / cell_name(cell.arch, cell.seed);
        fs::create_directories(dir);
        save_disc(d, dir / (spec.name + ".disc"));
      }
      log(opts, "estimate: " + cell_name(cell.arch, cell.seed) + " -> " + spec.name + " = " +
                    text::format_g9(r.estimate) + (r.truth ? " (truth " + text::format_g9(*r.truth) + ")" : ""));
      rows.push_back(std::move(r));
    }
  }
  if (rows.empty()) throw ConfigError("estimate: no trained evaluators found");
  fs::create_directories(cfg.results_dir());
  text::write_file(cfg.results_dir() / "gnnevaluator.csv", format_results(rows));
  return rows;
}

std::vector<ResultRow> cmd_baseline(const RunConfig& cfg, const StageOptions& opts) {
  write_manifest(cfg);
  const Graph g = load_source(cfg);
  const Split split = load_source_split(cfg, g);
  std::vector<std::pair<TargetSpec, Graph>> targets;
  for (const auto& spec : cfg.target_specs()) {
    Graph t = load_graph(spec.path);
    targets.emplace_back(spec, opts.with_truth ? std::move(t) : t.without_labels());
  }
  std::vector<Graph> metas;
  if (cfg.baselines.autoeval_g) {
    const auto manifest = text::read_file(cfg.meta_dir() / "manifest.csv");
    const auto count = static_cast<std::size_t>(std::count(manifest.begin(), manifest.end(), '\n')) - 1;
    for (std::size_t i = 0; i < count; ++i) {
      metas.push_back(load_graph(cfg.meta_dir() / ("meta_" + std::to_string(i) + ".gtxt")));
    }
  }

  std::vector<ResultRow> rows;
  for (const auto& cell : trained_cells(cfg)) {
    const TrainedModel model = load_model(cfg.model_path(cell.arch, cell.seed));
    const DiscrepancyContext ctx(model, g, cfg.disc_norm);
    const auto src_pred = embed_and_predict(model, g);
    ScoredLogits val;
    val.logits.resize(static_cast<Eigen::Index>(split.val_ids.size()), src_pred.logits.cols());
    for (std::size_t k = 0; k < split.val_ids.size(); ++k) {
      val.logits.row(static_cast<Eigen::Index>(k)) = src_pred.logits.row(split.val_ids[k]);
      val.labels.push_back(g.labels()[split.val_ids[k]]);
    }
    const double temperature = temperature_calibrate(val);
    std::vector<std::pair<std::string, AtcThreshold>> atc;
    for (auto score : {ConfidenceScore::MaxConfidence, ConfidenceScore::NegativeEntropy}) {
      const std::string base = "ATC-" + std::string(score_name(score));
      if (cfg.baselines.atc) atc.emplace_back(base, atc_fit_threshold(val, score));
      if (cfg.baselines.atc_calibrated) atc.emplace_back(base + "-c", atc_fit_threshold(val, score, temperature));
    }
    std::optional<AutoEvalGModel> aeg;
    if (cfg.baselines.autoeval_g) {
      const auto labels = labels_from_manifest(cfg.disc_dir(cell.arch, cell.seed));
      if (labels.size() != metas.size()) throw FormatError("meta manifest and disc manifest disagree in size");
      std::vector<double> feats;
      for (const auto& mg : metas) {
        feats.push_back(mmd(ctx.train_embedding(), embed_and_predict(model, mg).embedding,
                            cfg.baselines.mmd_kernel));
      }
      aeg = autoeval_g_fit(feats, labels, cfg.baselines.mmd_kernel);
    }

    for (const auto& [spec, target] : targets) {
      const auto pred = embed_and_predict(model, target);
      const ScoredLogits scored{pred.logits, {}};
      std::optional<double> truth;
      if (opts.with_truth) truth = truth_accuracy(model, target);
      auto add = [&](const std::string& method, double est) {
        rows.push_back({method, std::string(arch_name(cell.arch)), cell.seed, cfg.source_name,
                        spec.name, est, truth});
      };
      for (const auto& [name, fit] : atc) add(name, atc_estimate(scored, fit, fit.score));
      for (double tau : cfg.baselines.taus) add("Thres.(" + text::format_g9(tau) + ")", threshold_estimate(scored, tau));
      if (aeg) add("AutoEval-G", autoeval_g_estimate(*aeg, mmd(ctx.train_embedding(), pred.embedding, aeg->kernel)));
    }
    log(opts, "baseline: " + cell_name(cell.arch, cell.seed) + " T=" + text::format_g9(temperature));
  }
  if (rows.empty()) throw ConfigError("baseline: no trained checkpoints found");
  fs::create_directories(cfg.results_dir());
  text::write_file(cfg.results_dir() / "baselines.csv", format_results(rows));
  return rows;
}

std::vector<MaeCell> aggregate_mae(const std::vector<ResultRow>& rows) {
  struct Acc {
    std::vector<double> errors;
    bool missing = false;
  };
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::map<std::string, Acc>> groups;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> targets_of;
  for (const auto& r : rows) {
    const Key key{r.method, r.source, r.target};
    if (!groups.count(key)) {
      order.push_back(key);
      targets_of[{r.method, r.source}].push_back(r.target);
    }
    auto& acc = groups[key][r.model];
    if (const auto e = r.abs_error()) acc.errors.push_back(*e * 100.0);
    else acc.missing = true;
  }
  std::vector<MaeCell> cells;
  for (const auto& key : order) {
    MaeCell c{std::get<0>(key), std::get<1>(key), std::get<2>(key), {}, std::nullopt};
    bool complete = true;
    double sum = 0.0;
    for (const auto& [arch, acc] : groups[key]) {
      if (acc.missing || acc.errors.empty()) {
        c.per_arch[arch] = std::nullopt;
        complete = false;
      } else {
        const double mae = std::accumulate(acc.errors.begin(), acc.errors.end(), 0.0) /
                           static_cast<double>(acc.errors.size());
        c.per_arch[arch] = mae;
        sum += mae;
      }
    }
    if (complete && !c.per_arch.empty()) c.average = sum / static_cast<double>(c.per_arch.size());
    cells.push_back(std::move(c));
  }
  return cells;
}

std::string format_mae_table(const std::vector<MaeCell>& cells) {
  std::vector<std::string> archs;
  for (Arch a : kAllArchs) {
    const std::string n(arch_name(a));
    if (std::any_of(cells.begin(), cells.end(), [&](const MaeCell& c) { return c.per_arch.count(n) != 0; })) {
      archs.push_back(n);
    }
  }
  auto cell_text = [](const std::optional<double>& v) { return v ? text::format_fixed2(*v) : std::string("NA"); };
  std::string out = "method,source,target";
  for (const auto& a : archs) out += ',' + a;
  out += ",Avg.\n";
  for (const auto& c : cells) {
    out += c.method + ',' + c.source + ',' + c.target;
    for (const auto& a : archs) {
      auto it = c.per_arch.find(a);
      out += ',' + (it == c.per_arch.end() ? std::string("-") : cell_text(it->second));
    }
    out += ',' + cell_text(c.average) + '\n';
  }
  return out;
}

std::vector<MaeCell> cmd_report(const RunConfig& cfg, const StageOptions& opts) {
  std::vector<fs::path> files;
  if (fs::exists(cfg.results_dir())) {
    for (const auto& e : fs::directory_iterator(cfg.results_dir())) {
      if (e.path().extension() == ".csv") files.push_back(e.path());
    }
  }
  if (files.empty()) throw ConfigError("report: no results CSV under " + cfg.results_dir().string());
  std::sort(files.begin(), files.end());
  std::vector<ResultRow> rows;
  for (const auto& f : files) {
    try {
      auto part = parse_results(text::read_file(f));
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const FormatError& e) {
      throw FormatError(f.string() + ": " + e.what(), e.line());
    }
  }
  const auto cells = aggregate_mae(rows);
  fs::create_directories(cfg.report_dir());
  const std::string table = format_mae_table(cells);
  text::write_file(cfg.report_dir() / "mae.csv", table);
  log(opts, "report: " + std::to_string(rows.size()) + " result rows\n" + table);

  if (cfg.heatmap && fs::exists(cfg.out_dir / "targets")) {
    std::vector<fs::path> discs;
    for (const auto& e : fs::recursive_directory_iterator(cfg.out_dir / "targets")) {
      if (e.path().extension() == ".disc") discs.push_back(e.path());
    }
    std::sort(discs.begin(), discs.end());
    for (const auto& p : discs) {
      const DiscGraph d = load_disc(p);
      std::string csv;
      for (Eigen::Index r = 0; r < d.attrs.rows(); ++r) {
        for (Eigen::Index c = 0; c < d.attrs.cols(); ++c) {
          if (c) csv += ',';
          csv += text::format_g9(d.attrs(r, c));
        }
        csv += '\n';
      }
      const std::string name = "heatmap_" + p.parent_path().filename().string() + "_" + p.stem().string() + ".csv";
      text::write_file(cfg.report_dir() / name, csv);
    }
  }
  return cells;
}

std::vector<MaeCell> run_pipeline(const RunConfig& cfg, const StageOptions& opts) {
  if (cfg.synthetic) cmd_gen_sbm(cfg, opts);
  cmd_train_gnn(cfg, opts);
  cmd_build_discgraphs(cfg, opts);
  cmd_train_evaluator(cfg, opts);
  cmd_estimate(cfg, opts);
  cmd_baseline(cfg, opts);
  return cmd_report(cfg, opts);
}

}  // namespace gnneval
