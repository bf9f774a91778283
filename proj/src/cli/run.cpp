#include "sgmlab/cli/run.hpp"

#include "sgmlab/bias_estimator.hpp"
#include "sgmlab/cli/formats.hpp"
#include "sgmlab/cli/plot.hpp"
#include "sgmlab/diffusion_train.hpp"
#include "sgmlab/errors.hpp"
#include "sgmlab/geometry_metrics.hpp"
#include "sgmlab/io.hpp"
#include "sgmlab/sampler.hpp"
#include "sgmlab/score_model.hpp"
#include "sgmlab/synth_data.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace sgmlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Every flag of every subcommand. Field defaults are the tool defaults.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string name;
  std::string config;

  // gen-data
  int atoms = 6;
  int molecules = 50;
  int conformers = 5;
  double bond_length = 1.5;
  double bond_angle = 112.0;
  double concentration = 20.0;

  // schedule and model
  double sigma_max = 0.79;
  double sigma_min = 0.02;
  int levels = 6;
  std::string hidden = "128,128,128";
  bool center_input = true;

  // train
  std::string data;
  double lr = 1e-3;
  int batch_size = 64;
  std::int64_t steps = 20000;
  double lambda = 0.0;
  std::string lambda_grid;
  std::string loss_weighting = "sigma-squared";
  std::int64_t log_interval = 100;

  // sample / measure-bias
  std::string checkpoint;
  int ratio = 2;
  double a = 1e-5;
  int steps_per_level = 50;
  double init_scale = std::numeric_limits<double>::quiet_NaN();
  int samples_per_level = 500;
  int det_steps = 1;
  bool uniform_levels = false;
  int bins = 40;

  // evaluate / props
  std::string generated;
  std::string reference;
  double delta = 0.5;
  std::string properties = "rg,end_to_end,torsion_energy";
  std::string stats = "mean,min,max";

  // plot
  std::string inputs;
  std::string labels;
  std::string x_column = "sigma";
  std::string y_column = "mean_abs_bias";
  std::string title;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<int> parse_widths(const std::string& s) {
  std::vector<int> w;
  for (const auto& item : split_list(s)) {
    try {
      w.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("hidden widths must be integers, got '" + item + "'");
    }
  }
  return w;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + s + "' is not a number");
  }
}

// Options that only place outputs; they are reported under "outputs" rather
// than in the echoed config so manifests of two runs compare by settings.
const std::set<std::string> kLocationKeys = {"out", "name", "config"};

class Stage {
 public:
  Stage(std::string subcommand, json config, const RunConfig& cfg)
      : subcommand_(std::move(subcommand)), config_(std::move(config)), cfg_(cfg),
        start_(std::chrono::steady_clock::now()) {}

  void add_input(const fs::path& p) {
    inputs_[p.string()] = io::digest(io::read_file(p));
  }

  // Digest over settings and inputs; written at the top of every report.
  std::string digest() const {
    return io::digest(json{{"subcommand", subcommand_}, {"config", config_}, {"inputs", inputs_}}.dump());
  }

  fs::path output(const std::string& file) {
    outputs_.push_back(file);
    return fs::path(cfg_.out) / file;
  }

  void write(const std::string& file, const std::string& content) {
    io::write_file_atomic(output(file), content);
  }

  void finish(const std::string& primary) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m;
    m["tool"] = "sgmlab";
    m["subcommand"] = subcommand_;
    m["config"] = config_;
    m["seed"] = cfg_.seed;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["manifest_digest"] = digest();
    m["wall_seconds"] = secs;
    const fs::path p = fs::path(cfg_.out) / (fs::path(primary).stem().string() + ".manifest.json");
    io::write_file_atomic(p, m.dump(2) + "\n");
  }

  const json& config() const { return config_; }

 private:
  std::string subcommand_;
  json config_;
  const RunConfig& cfg_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required --") + flag);
  return value;
}

NoiseSchedule schedule_of(const RunConfig& c) {
  return NoiseSchedule::geometric(c.sigma_max, c.sigma_min, c.levels);
}

// --- subcommands -----------------------------------------------------------

void cmd_gen_data(const RunConfig& c, Stage& st, std::ostream& out) {
  MoleculeTemplate tmpl = MoleculeTemplate::chain(c.atoms);
  tmpl.bond_length = c.bond_length;
  tmpl.bond_angle_deg = c.bond_angle;
  for (auto& t : tmpl.torsions) t.concentrations.assign(t.concentrations.size(), c.concentration);
  tmpl.validate();
  const auto sets = gen_dataset(tmpl, c.molecules, c.conformers, c.seed);
  const std::string name = c.name.empty() ? "dataset.jsonl" : c.name;
  st.write(name, dataset_to_jsonl(sets));
  st.finish(name);
  out << "wrote " << sets.size() << " molecules to " << (fs::path(c.out) / name).string() << "\n";
}

void cmd_train(const RunConfig& c, Stage& st, std::ostream& out) {
  const fs::path data = require(c.data, "data");
  st.add_input(data);
  const auto sets = read_dataset(data);
  const auto pool = pool_conformers(sets);
  const int n_atoms = static_cast<int>(pool.front().rows());

  std::vector<double> lambdas{c.lambda};
  if (!c.lambda_grid.empty()) {
    lambdas.clear();
    for (const auto& item : split_list(c.lambda_grid)) lambdas.push_back(parse_number(item));
  }
  const std::string base = c.name.empty() ? "checkpoint.json" : c.name;
  std::string primary = base;
  for (double lambda : lambdas) {
    TrainConfig tc;
    tc.lr = c.lr;
    tc.batch_size = c.batch_size;
    tc.steps = c.steps;
    tc.lambda_ip = lambda;
    tc.seed = derive_seed(c.seed, 2);
    tc.loss_weighting = loss_weighting_from_string(c.loss_weighting);
    tc.log_interval = c.log_interval;
    tc.validate();

    ScoreModel model = ScoreModel::create(n_atoms, schedule_of(c), parse_widths(c.hidden),
                                          derive_seed(c.seed, 1), c.center_input);
    const TrainLog log = train(pool, model, tc);

    std::string name = base;
    if (!c.lambda_grid.empty()) {
      const fs::path b(base);
      name = b.stem().string() + "-lambda" + io::format_double(lambda) + b.extension().string();
    }
    if (primary == base) primary = name;
    json echo = st.config();
    echo["lambda"] = io::format_double(lambda);
    save_checkpoint(model, st.output(name), {{"train_config", echo}, {"final_loss", log.final_loss}});
    st.write(fs::path(name).stem().string() + ".train_log.csv", train_log_csv(log, st.digest()));
    out << "lambda " << lambda << ": final loss " << log.final_loss << " -> "
        << (fs::path(c.out) / name).string() << "\n";
  }
  st.finish(primary);
}

void cmd_sample(const RunConfig& c, Stage& st, std::ostream& out) {
  const fs::path ckpt = require(c.checkpoint, "checkpoint");
  const fs::path data = require(c.data, "data");
  st.add_input(ckpt);
  st.add_input(data);
  const ScoreModel model = load_checkpoint(ckpt);
  const auto refs = read_dataset(data);
  if (c.ratio < 1) throw ConfigError("--ratio must be at least 1");

  std::vector<ConformerSet> gen;
  for (std::size_t m = 0; m < refs.size(); ++m) {
    SamplerConfig sc;
    sc.a = c.a;
    sc.steps_per_level = c.steps_per_level;
    sc.init_scale = c.init_scale;
    sc.seed = derive_seed(c.seed, static_cast<std::uint64_t>(m));
    ConformerSet set;
    set.id = refs[m].id;
    set.tmpl = refs[m].tmpl;
    set.seed = sc.seed;
    set.conformers = langevin_sample_many(
        model, model.schedule(), sc, c.ratio * static_cast<int>(refs[m].conformers.size()));
    gen.push_back(std::move(set));
  }
  const std::string name = c.name.empty() ? "generated.jsonl" : c.name;
  st.write(name, dataset_to_jsonl(gen));
  st.finish(name);
  out << "generated conformers for " << gen.size() << " molecules\n";
}

void cmd_measure_bias(const RunConfig& c, Stage& st, std::ostream& out) {
  const fs::path ckpt = require(c.checkpoint, "checkpoint");
  const fs::path data = require(c.data, "data");
  st.add_input(ckpt);
  st.add_input(data);
  const ScoreModel model = load_checkpoint(ckpt);
  const auto pool = pool_conformers(read_dataset(data));

  BiasConfig bc;
  bc.samples_per_level = c.samples_per_level;
  bc.det_steps = c.det_steps;
  bc.a = c.a;
  bc.seed = c.seed;
  bc.uniform_levels = c.uniform_levels;
  bc.keep_raw = true;
  const BiasReport rep = estimate_bias(model, model.schedule(), pool, bc);

  std::vector<double> pooled;
  for (const auto& l : rep.levels) pooled.insert(pooled.end(), l.signed_residuals.begin(), l.signed_residuals.end());

  const std::string name = c.name.empty() ? "bias.csv" : c.name;
  st.write(name, bias_csv(rep, st.digest()));
  st.write(fs::path(name).stem().string() + "_hist.csv", histogram_csv(bias_histogram(pooled, c.bins), st.digest()));
  st.finish(name);
  out << "global mean bias " << rep.global_mean << "\n";
}

std::vector<std::pair<const ConformerSet*, const ConformerSet*>> pair_molecules(
    const std::vector<ConformerSet>& gen, const std::vector<ConformerSet>& ref) {
  std::map<std::string, const ConformerSet*> by_id;
  for (const auto& g : gen) by_id[g.id] = &g;
  std::vector<std::pair<const ConformerSet*, const ConformerSet*>> pairs;
  for (const auto& r : ref) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw DomainError("no generated conformers for molecule '" + r.id + "'");
    pairs.emplace_back(it->second, &r);
  }
  return pairs;
}

void cmd_evaluate(const RunConfig& c, Stage& st, std::ostream& out) {
  const fs::path gen_path = require(c.generated, "generated");
  const fs::path ref_path = require(c.reference, "reference");
  st.add_input(gen_path);
  st.add_input(ref_path);
  const auto gen = read_dataset(gen_path);
  const auto ref = read_dataset(ref_path);
  std::vector<RmsdMatrix> mats;
  std::vector<std::string> ids;
  for (const auto& [g, r] : pair_molecules(gen, ref)) {
    mats.push_back(pairwise_rmsd(g->conformers, r->conformers));
    ids.push_back(r->id);
  }
  const EvalReport rep = eval_report(mats, c.delta, ids);
  const std::string name = c.name.empty() ? "eval.csv" : c.name;
  st.write(name, eval_csv(rep, st.digest()));
  st.finish(name);
  out << "COV mean " << rep.cov_mean << " median " << rep.cov_median << "; MAT mean "
      << rep.mat_mean << " median " << rep.mat_median << "\n";
}

void cmd_props(const RunConfig& c, Stage& st, std::ostream& out) {
  const fs::path gen_path = require(c.generated, "generated");
  const fs::path ref_path = require(c.reference, "reference");
  st.add_input(gen_path);
  st.add_input(ref_path);
  const auto gen = read_dataset(gen_path);
  const auto ref = read_dataset(ref_path);
  std::vector<Statistic> stats;
  for (const auto& s : split_list(c.stats)) stats.push_back(statistic_from_string(s));
  if (stats.empty()) throw ConfigError("--stats is empty");

  std::vector<std::vector<Conformation>> gsets, rsets;
  for (const auto& [g, r] : pair_molecules(gen, ref)) {
    gsets.push_back(g->conformers);
    rsets.push_back(r->conformers);
  }
  std::string csv = "# manifest: " + st.digest() + "\nproperty,statistic,mae\n";
  for (const auto& p : split_list(c.properties)) {
    const Property prop = property_from_string(p);
    for (const auto& [s, v] : ensemble_property_mae(gsets, rsets, ref.front().tmpl, prop, stats)) {
      csv += to_string(prop) + "," + to_string(s) + "," + io::format_double(v) + "\n";
      out << to_string(prop) << " " << to_string(s) << " MAE " << v << "\n";
    }
  }
  const std::string name = c.name.empty() ? "props.csv" : c.name;
  st.write(name, csv);
  st.finish(name);
}

void cmd_plot(const RunConfig& c, Stage& st, std::ostream& out) {
  const auto inputs = split_list(require(c.inputs, "inputs"));
  auto labels = split_list(c.labels);
  if (!labels.empty() && labels.size() != inputs.size())
    throw ConfigError("--labels needs one label per input");
  std::vector<Series> series;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    st.add_input(inputs[i]);
    const CsvTable t = parse_csv(io::read_file(inputs[i]));
    const std::size_t xc = t.column(c.x_column);
    const std::size_t yc = t.column(c.y_column);
    Series s;
    s.label = labels.empty() ? fs::path(inputs[i]).stem().string() : labels[i];
    for (const auto& row : t.rows) {
      if (row.size() <= std::max(xc, yc)) throw DomainError("short row in '" + inputs[i] + "'");
      s.x.push_back(parse_number(row[xc]));
      s.y.push_back(parse_number(row[yc]));
    }
    series.push_back(std::move(s));
  }
  PlotOptions po;
  po.title = c.title;
  po.x_label = c.x_column;
  po.y_label = c.y_column;
  const std::string name = c.name.empty() ? "plot.svg" : c.name;
  emit_plot(series, st.output(name), po);
  st.finish(name);
  out << "wrote " << (fs::path(c.out) / name).string() << "\n";
}

// --- option wiring ---------------------------------------------------------

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--seed", c.seed, "Global RNG seed");
  sub->add_option("-o,--out", c.out, "Output directory");
  sub->add_option("--name", c.name, "Primary output file name");
  sub->add_option("--config", c.config, "Flat key = value config file");
}

void add_schedule(CLI::App* sub, RunConfig& c) {
  sub->add_option("--sigma-max", c.sigma_max, "Largest noise level");
  sub->add_option("--sigma-min", c.sigma_min, "Smallest noise level");
  sub->add_option("--levels", c.levels, "Number of noise levels");
}

void add_sampler(CLI::App* sub, RunConfig& c) {
  sub->add_option("--a", c.a, "Step size at the smallest noise level");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"score-based conformer generation, exposure-bias measurement and evaluation", "sgmlab"};
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();

  auto* gen = app.add_subcommand("gen-data", "Generate a toy chain-molecule conformer dataset");
  add_common(gen, c);
  gen->add_option("--atoms", c.atoms, "Atoms per chain");
  gen->add_option("--molecules", c.molecules, "Number of molecules");
  gen->add_option("--conformers", c.conformers, "Conformers per molecule");
  gen->add_option("--bond-length", c.bond_length, "Bond length");
  gen->add_option("--bond-angle", c.bond_angle, "Bond angle in degrees");
  gen->add_option("--concentration", c.concentration, "Von Mises concentration of every torsion mode");

  auto* tr = app.add_subcommand("train", "Train a score model (input perturbation when --lambda > 0)");
  add_common(tr, c);
  add_schedule(tr, c);
  tr->add_option("--data", c.data, "Training dataset (.jsonl)");
  tr->add_option("--hidden", c.hidden, "Hidden layer widths, comma separated");
  tr->add_option("--center-input", c.center_input, "Centre inputs and project scores to zero mean");
  tr->add_option("--lr", c.lr, "Adam learning rate");
  tr->add_option("--batch-size", c.batch_size, "Batch size");
  tr->add_option("--steps", c.steps, "Optimisation steps");
  tr->add_option("--lambda", c.lambda, "Input perturbation weight");
  tr->add_option("--lambda-grid", c.lambda_grid, "Train one model per listed lambda, e.g. 0.05,0.1,0.15,0.2");
  tr->add_option("--loss-weighting", c.loss_weighting, "sigma-squared or unweighted");
  tr->add_option("--log-interval", c.log_interval, "Steps per training-log record");

  auto* sa = app.add_subcommand("sample", "Generate conformers with annealed Langevin dynamics");
  add_common(sa, c);
  add_sampler(sa, c);
  sa->add_option("--checkpoint", c.checkpoint, "Model checkpoint");
  sa->add_option("--data", c.data, "Reference dataset defining molecules and set sizes");
  sa->add_option("--ratio", c.ratio, "Generated conformers per reference conformer");
  sa->add_option("--steps-per-level", c.steps_per_level, "Langevin steps per noise level");
  sa->add_option("--init-scale", c.init_scale, "Prior std (default: largest noise level)");

  auto* mb = app.add_subcommand("measure-bias", "Estimate exposure bias per noise level");
  add_common(mb, c);
  add_sampler(mb, c);
  mb->add_option("--checkpoint", c.checkpoint, "Model checkpoint");
  mb->add_option("--data", c.data, "Ground-truth dataset");
  mb->add_option("--samples-per-level", c.samples_per_level, "Samples per level");
  mb->add_option("--det-steps", c.det_steps, "Drift-only updates per level");
  mb->add_option("--uniform-levels", c.uniform_levels, "Draw start levels uniformly instead of stratifying");
  mb->add_option("--bins", c.bins, "Histogram bins");

  auto* ev = app.add_subcommand("evaluate", "COV/MAT of generated against reference conformers");
  add_common(ev, c);
  ev->add_option("--generated", c.generated, "Generated dataset");
  ev->add_option("--reference", c.reference, "Reference dataset");
  ev->add_option("--delta", c.delta, "Coverage threshold");

  auto* pr = app.add_subcommand("props", "Ensemble property MAE");
  add_common(pr, c);
  pr->add_option("--generated", c.generated, "Generated dataset");
  pr->add_option("--reference", c.reference, "Reference dataset");
  pr->add_option("--properties", c.properties, "rg,end_to_end,torsion_energy");
  pr->add_option("--stats", c.stats, "mean,min,max");

  auto* pl = app.add_subcommand("plot", "Render CSV series as an SVG line chart");
  add_common(pl, c);
  pl->add_option("--inputs", c.inputs, "CSV files, comma separated");
  pl->add_option("--labels", c.labels, "Series labels, comma separated");
  pl->add_option("--x-column", c.x_column, "Column for x");
  pl->add_option("--y-column", c.y_column, "Column for y");
  pl->add_option("--title", c.title, "Chart title");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (!c.config.empty()) {
    try {
      for (const auto& [key, value] : parse_config_text(io::read_file(c.config))) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr) {
          err << "error: unknown config key '" << key << "' for " << sub->get_name() << "\n";
          return kExitUsage;
        }
        if (opt->count() > 0) continue;  // command line wins
        opt->add_result(value);
        opt->run_callback();
      }
    } catch (const CLI::Error& e) {
      err << "error: bad config value: " << e.what() << "\n";
      return kExitUsage;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitDomain;
    }
  }

  json resolved = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string key = opt->get_single_name();
    if (key.empty() || key == "help" || kLocationKeys.count(key)) continue;
    std::string value = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
    resolved[key] = value;
  }

  try {
    Stage st(sub->get_name(), resolved, c);
    const std::string& name = sub->get_name();
    if (name == "gen-data") cmd_gen_data(c, st, out);
    else if (name == "train") cmd_train(c, st, out);
    else if (name == "sample") cmd_sample(c, st, out);
    else if (name == "measure-bias") cmd_measure_bias(c, st, out);
    else if (name == "evaluate") cmd_evaluate(c, st, out);
    else if (name == "props") cmd_props(c, st, out);
    else if (name == "plot") cmd_plot(c, st, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace sgmlab::cli
