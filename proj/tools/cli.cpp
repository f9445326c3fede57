#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>

#include "hhcl/hhcl.hpp"

namespace hhcl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  if (is.bad()) throw IoError("read failed for " + path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  return os;
}

void write_text(const std::string& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!os.flush()) throw IoError("write failed for " + path);
}

// Resolved inputs and intended outputs, written before any work starts.
struct Manifest {
  std::string command;
  json parameters = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void write(const std::string& path) const {
    json j;
    j["tool"] = "hhcl";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["parameters"] = parameters;
    j["inputs"] = json::array();
    for (const auto& p : inputs) j["inputs"].push_back({{"path", p}, {"sha256", sha256_file(p)}});
    j["outputs"] = outputs;
    write_text(path, j.dump(2) + "\n");
  }
};

std::vector<Sample> load_checked(const std::string& path) {
  if (!fs::exists(path)) throw IoError("input file not found: " + path);
  return load_features(path);
}

Matrix embed_or_raw(const std::vector<Sample>& s, const std::optional<EncoderModel>& model) {
  Matrix raw = feature_matrix(s);
  if (!model) return raw;
  if (raw.cols() != model->input_dims())
    throw ParameterError("feature dimension " + std::to_string(raw.cols()) + " does not match checkpoint input " +
                         std::to_string(model->input_dims()));
  return embed(*model, raw).matrix();
}

json metrics_json(const RetrievalResult& r) {
  return {{"mAP", r.mAP}, {"rank1", r.rank(1)}, {"rank5", r.rank(5)}, {"rank10", r.rank(10)}};
}

RetrievalResult evaluate_sets(const std::vector<Sample>& query, const std::vector<Sample>& gallery,
                              const std::optional<EncoderModel>& model) {
  if (query.empty() || gallery.empty()) throw ParameterError("query and gallery must be non-empty");
  if (feature_dims(query) != feature_dims(gallery))
    throw ParameterError("query dimension " + std::to_string(feature_dims(query)) + " differs from gallery dimension " +
                         std::to_string(feature_dims(gallery)));
  return evaluate_retrieval(embed_or_raw(query, model), embed_or_raw(gallery, model), sample_meta(query),
                            sample_meta(gallery));
}

// --- TrainConfig flags ------------------------------------------------------

class ConfigFlags {
 public:
  // Registers --kebab-case flags for every field except those in `skip`.
  void add(CLI::App* app, const std::vector<std::string>& skip = {}) {
    auto want = [&](const std::string& n) { return std::find(skip.begin(), skip.end(), n) == skip.end(); };
    app->add_option("--config", config_path_, "JSON config file; flags override its values");
    if (want("mu")) bind(app, "--mu", &TrainConfig::mu, "cluster-loss weight in [0, 1]");
    bind(app, "--tau-c", &TrainConfig::tau_c, "cluster temperature");
    bind(app, "--tau-ins", &TrainConfig::tau_ins, "instance temperature");
    bind(app, "--alpha", &TrainConfig::alpha, "centroid momentum");
    bind(app, "--num-identities-per-batch", &TrainConfig::num_identities_per_batch, "clusters per batch");
    bind(app, "--instances-per-identity", &TrainConfig::instances_per_identity, "samples per cluster per batch");
    bind(app, "--slots-per-cluster", &TrainConfig::slots_per_cluster, "instance memory slots per cluster");
    bind(app, "--epochs", &TrainConfig::epochs, "training epochs");
    bind(app, "--lr", &TrainConfig::lr, "base learning rate");
    bind(app, "--weight-decay", &TrainConfig::weight_decay, "decoupled weight decay");
    bind(app, "--lr-decay-every", &TrainConfig::lr_decay_every, "epochs between learning-rate decays");
    bind(app, "--lr-decay-factor", &TrainConfig::lr_decay_factor, "learning-rate decay factor");
    bind(app, "--dbscan-eps", &TrainConfig::dbscan_eps, "DBSCAN radius on the Jaccard distance");
    bind(app, "--dbscan-min-pts", &TrainConfig::dbscan_min_pts, "DBSCAN core-point neighbor count");
    bind(app, "--kreciprocal-k", &TrainConfig::kreciprocal_k, "k for k-reciprocal neighbors");
    bind(app, "--original-distance-weight", &TrainConfig::original_distance_weight,
         "weight of the Euclidean distance blended into the Jaccard distance");
    bind(app, "--hidden-dims", &TrainConfig::hidden_dims, "hidden layer widths, comma separated")->delimiter(',');
    bind(app, "--embedding-dim", &TrainConfig::embedding_dim, "embedding width");
    if (want("seed")) bind(app, "--seed", &TrainConfig::seed, "random seed");
  }

  TrainConfig resolve() const {
    TrainConfig cfg = config_path_.empty() ? TrainConfig{} : load_config(config_path_);
    for (const auto& a : apply_) a(cfg);
    validate_config(cfg);
    return cfg;
  }

  const std::string& config_path() const { return config_path_; }

 private:
  template <typename T>
  CLI::Option* bind(CLI::App* app, const std::string& flag, T TrainConfig::*field, const std::string& help) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *holder, help);
    apply_.push_back([holder, opt, field](TrainConfig& c) {
      if (opt->count() > 0) c.*field = *holder;
    });
    return opt;
  }

  std::string config_path_;
  std::vector<std::function<void(TrainConfig&)>> apply_;
};

void add_synth_flags(CLI::App* app, SynthSpec& s) {
  app->add_option("--identities", s.num_identities, "training identities")->capture_default_str();
  app->add_option("--test-identities", s.num_test_identities, "query/gallery identities")->capture_default_str();
  app->add_option("--instances", s.instances_per_identity, "instances per identity")->capture_default_str();
  app->add_option("--dims", s.dims, "feature dimension")->capture_default_str();
  app->add_option("--cameras", s.num_cameras, "number of cameras")->capture_default_str();
  app->add_option("--sigma-within", s.sigma_within, "per-instance noise")->capture_default_str();
  app->add_option("--sigma-cam", s.sigma_cam, "per-camera offset spread")->capture_default_str();
  app->add_option("--camera-shared", s.camera_shared, "fraction of camera offset variance shared across identities")
      ->capture_default_str();
  app->add_option("--min-angle", s.min_angle, "minimum angle between identity prototypes (radians)")
      ->capture_default_str();
}

json synth_json(const SynthSpec& s) {
  return {{"identities", s.num_identities},   {"test_identities", s.num_test_identities},
          {"instances", s.instances_per_identity}, {"dims", s.dims},
          {"cameras", s.num_cameras},         {"sigma_within", s.sigma_within},
          {"sigma_cam", s.sigma_cam},         {"camera_shared", s.camera_shared},
          {"min_angle", s.min_angle},         {"seed", s.seed}};
}

// --- training core shared by `train` and `ablate` ---------------------------

struct RunOutputs {
  std::string metrics_csv;      // empty: not written
  std::string checkpoint;       // empty: not written
  bool deterministic = false;
};

TrainResult train_and_record(const std::vector<Sample>& train_set, const TrainConfig& cfg, const RunOutputs& out) {
  if (train_set.empty()) throw ParameterError("training set is empty");
  const UnlabeledSamples samples = strip_identities(train_set);
  std::ofstream metrics;
  if (!out.metrics_csv.empty()) {
    metrics = open_out(out.metrics_csv);
    metrics << "epoch,C,outliers,loss,loss_cls,loss_ins,seconds\n";
  }
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochReport& r) {
    if (!metrics.is_open()) return;
    metrics << r.epoch << ',' << r.num_clusters << ',' << r.num_outliers << ',' << num(r.loss) << ','
            << num(r.loss_cls) << ',' << num(r.loss_ins) << ',' << (out.deterministic ? "0" : num(r.seconds)) << '\n';
    metrics.flush();
  };
  auto result = train(samples, cfg, make_encoder(cfg, samples.dims()), hooks);
  if (metrics.is_open() && !metrics.flush()) throw IoError("write failed for " + out.metrics_csv);
  if (!out.checkpoint.empty()) save_checkpoint({result.model, result.optimizer, cfg.epochs}, out.checkpoint);
  return result;
}

// --- subcommands ------------------------------------------------------------

struct GenDataArgs {
  SynthSpec spec;
  std::string out_dir;
};

int cmd_gen_data(const GenDataArgs& a) {
  ensure_dir(a.out_dir);
  const std::string train = (fs::path(a.out_dir) / "train.bin").string();
  const std::string query = (fs::path(a.out_dir) / "query.bin").string();
  const std::string gallery = (fs::path(a.out_dir) / "gallery.bin").string();
  Manifest m{"gen-data", synth_json(a.spec), {}, {train, query, gallery}};
  m.write((fs::path(a.out_dir) / "manifest.json").string());
  const auto ds = generate(a.spec);
  save_features(ds.train, train);
  save_features(ds.query, query);
  save_features(ds.gallery, gallery);
  std::cout << "wrote " << ds.train.size() << " train, " << ds.query.size() << " query, " << ds.gallery.size()
            << " gallery samples to " << a.out_dir << "\n";
  return kExitOk;
}

struct ClusterArgs {
  std::string features, output, checkpoint;
  TrainConfig cfg;  // clustering fields only
};

int cmd_cluster(const ClusterArgs& a) {
  Manifest m{"cluster",
             {{"dbscan_eps", a.cfg.dbscan_eps},
              {"dbscan_min_pts", a.cfg.dbscan_min_pts},
              {"kreciprocal_k", a.cfg.kreciprocal_k},
              {"original_distance_weight", a.cfg.original_distance_weight}},
             {a.features},
             {a.output}};
  if (!a.checkpoint.empty()) m.inputs.push_back(a.checkpoint);
  for (const auto& p : m.inputs)
    if (!fs::exists(p)) throw IoError("input file not found: " + p);
  m.write(a.output + ".manifest.json");

  const auto samples = load_checked(a.features);
  std::optional<EncoderModel> model;
  if (!a.checkpoint.empty()) model = load_checkpoint(a.checkpoint).model;
  const auto emb = model ? embed_all(*model, strip_identities(samples))
                         : EmbeddingMatrix::normalized(feature_matrix(samples));
  const auto labels = cluster_embeddings(emb, clustering_params(a.cfg));
  auto os = open_out(a.output);
  os << "sample_index,cluster_id\n";
  for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << labels.assignment()[i] << '\n';
  if (!os.flush()) throw IoError("write failed for " + a.output);
  std::cout << labels.num_clusters() << " clusters, " << labels.num_outliers() << " outliers\n";
  return kExitOk;
}

struct TrainArgs {
  std::string train, query, gallery, out_dir;
  bool deterministic = false;
};

int cmd_train(const TrainArgs& a, const TrainConfig& cfg) {
  if (a.query.empty() != a.gallery.empty()) throw UsageError("--query and --gallery must be given together");
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  RunOutputs out{(dir / "metrics.csv").string(), (dir / "checkpoint.bin").string(), a.deterministic};
  Manifest m{"train", {{"config", cfg}, {"seed", cfg.seed}, {"deterministic", a.deterministic}}, {a.train}, {}};
  if (!a.query.empty()) m.inputs.insert(m.inputs.end(), {a.query, a.gallery});
  m.outputs = {out.checkpoint, out.metrics_csv};
  if (!a.query.empty()) m.outputs.push_back((dir / "eval.json").string());
  for (const auto& p : m.inputs)
    if (!fs::exists(p)) throw IoError("input file not found: " + p);
  m.write((dir / "manifest.json").string());

  const auto train_set = load_checked(a.train);
  std::vector<Sample> query, gallery;
  if (!a.query.empty()) {
    query = load_checked(a.query);
    gallery = load_checked(a.gallery);
  }
  const auto result = train_and_record(train_set, cfg, out);
  if (!a.query.empty()) {
    const auto ev = evaluate_sets(query, gallery, result.model);
    const auto j = metrics_json(ev);
    write_text((dir / "eval.json").string(), j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::string query, gallery, checkpoint, output, per_query;
};

int cmd_evaluate(const EvaluateArgs& a) {
  std::vector<std::string> inputs{a.query, a.gallery};
  if (!a.checkpoint.empty()) inputs.push_back(a.checkpoint);
  for (const auto& p : inputs)
    if (!fs::exists(p)) throw IoError("input file not found: " + p);
  if (!a.output.empty()) {
    Manifest m{"evaluate", json::object(), inputs, {a.output}};
    if (!a.per_query.empty()) m.outputs.push_back(a.per_query);
    m.write(a.output + ".manifest.json");
  }

  const auto query = load_checked(a.query);
  const auto gallery = load_checked(a.gallery);
  std::optional<EncoderModel> model;
  if (!a.checkpoint.empty()) model = load_checkpoint(a.checkpoint).model;
  const auto ev = evaluate_sets(query, gallery, model);
  const auto j = metrics_json(ev);
  if (!a.output.empty()) write_text(a.output, j.dump(2) + "\n");
  if (!a.per_query.empty()) {
    auto os = open_out(a.per_query);
    os << "query_index,identity,camera,ap,first_match\n";
    for (std::size_t q = 0; q < ev.queries.size(); ++q) {
      const auto& r = ev.queries[q];
      os << q << ',' << query[q].identity << ',' << query[q].camera << ',' << (r.ap ? num(*r.ap) : "") << ','
         << (r.first_match ? std::to_string(*r.first_match) : "") << '\n';
    }
    if (!os.flush()) throw IoError("write failed for " + a.per_query);
  }
  std::cout << j.dump() << "\n";
  return kExitOk;
}

struct AblateArgs {
  std::string mu_list;  // comma separated
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string train, query, gallery, out_dir;
  SynthSpec spec;
};

std::vector<double> parse_mu_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : CLI::detail::split(text, ',')) {
    const auto tok = CLI::detail::trim_copy(item);
    if (tok.empty()) continue;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || end != tok.data() + tok.size()) throw UsageError("bad --mu value '" + tok + "'");
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("--mu values must lie in [0, 1], got " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--mu needs at least one value");
  return out;
}

int cmd_ablate(const AblateArgs& a, const TrainConfig& base) {
  const std::vector<double> mus = parse_mu_list(a.mu_list);
  if (a.seeds.empty()) throw UsageError("--seeds needs at least one value");
  const bool from_files = !a.train.empty();
  if (from_files && (a.query.empty() || a.gallery.empty()))
    throw UsageError("--train requires --query and --gallery");

  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  const std::string summary = (dir / "summary.csv").string();
  json params{{"config", base}, {"mu", mus}, {"seeds", a.seeds}};
  if (!from_files) params["synthetic"] = synth_json(a.spec);
  Manifest m{"ablate", params, {}, {summary}};
  if (from_files) m.inputs = {a.train, a.query, a.gallery};
  for (const auto& p : m.inputs)
    if (!fs::exists(p)) throw IoError("input file not found: " + p);
  m.write((dir / "manifest.json").string());

  SynthDataset files;
  if (from_files) files = {load_checked(a.train), load_checked(a.query), load_checked(a.gallery)};

  auto os = open_out(summary);
  os << "mu,seed,mAP,rank1,rank5,rank10\n";
  std::vector<double> mean(mus.size(), 0.0);
  for (const auto seed : a.seeds) {
    SynthDataset generated;
    if (!from_files) {
      SynthSpec s = a.spec;
      s.seed = seed;
      generated = generate(s);
    }
    const SynthDataset& ds = from_files ? files : generated;
    for (std::size_t i = 0; i < mus.size(); ++i) {
      TrainConfig cfg = base;
      cfg.mu = mus[i];
      cfg.seed = seed;
      const auto result = train_and_record(ds.train, cfg, {});
      const auto ev = evaluate_sets(ds.query, ds.gallery, result.model);
      os << num(cfg.mu) << ',' << seed << ',' << num(ev.mAP) << ',' << num(ev.rank(1)) << ',' << num(ev.rank(5))
         << ',' << num(ev.rank(10)) << '\n';
      os.flush();
      mean[i] += ev.mAP / static_cast<double>(a.seeds.size());
      std::cout << "mu " << num(cfg.mu) << " seed " << seed << " mAP " << num(ev.mAP) << std::endl;
    }
  }
  if (!os.flush()) throw IoError("write failed for " + summary);
  for (std::size_t i = 0; i < mus.size(); ++i)
    std::cout << "mean mAP at mu " << num(mus[i]) << ": " << num(mean[i]) << "\n";
  return kExitOk;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "hhcl: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Hybrid hard-instance / cluster contrastive learning for unsupervised re-identification", "hhcl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  bool deterministic = false;

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic train/query/gallery split");
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->required();
  add_synth_flags(gen_cmd, gen.spec);
  gen_cmd->add_option("--seed", gen.spec.seed, "generator seed")->capture_default_str();

  ClusterArgs clu;
  auto* clu_cmd = app.add_subcommand("cluster", "assign pseudo labels to a feature file");
  clu_cmd->add_option("--features", clu.features, "feature file")->required();
  clu_cmd->add_option("--output", clu.output, "CSV of sample_index,cluster_id")->required();
  clu_cmd->add_option("--checkpoint", clu.checkpoint, "embed through this model first");
  clu_cmd->add_option("--dbscan-eps", clu.cfg.dbscan_eps)->capture_default_str();
  clu_cmd->add_option("--dbscan-min-pts", clu.cfg.dbscan_min_pts)->capture_default_str();
  clu_cmd->add_option("--kreciprocal-k", clu.cfg.kreciprocal_k)->capture_default_str();
  clu_cmd->add_option("--original-distance-weight", clu.cfg.original_distance_weight)->capture_default_str();

  TrainArgs tr;
  ConfigFlags tr_cfg;
  auto* tr_cmd = app.add_subcommand("train", "train an encoder on unlabeled features");
  tr_cmd->add_option("--train", tr.train, "training feature file")->required();
  tr_cmd->add_option("--query", tr.query, "query feature file for final evaluation");
  tr_cmd->add_option("--gallery", tr.gallery, "gallery feature file for final evaluation");
  tr_cmd->add_option("--out-dir", tr.out_dir, "output directory")->required();
  tr_cmd->add_flag("--deterministic", deterministic, "single-threaded, wall time recorded as 0");
  tr_cfg.add(tr_cmd);

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "retrieval metrics for a query/gallery pair");
  ev_cmd->add_option("--query", ev.query, "query feature file")->required();
  ev_cmd->add_option("--gallery", ev.gallery, "gallery feature file")->required();
  ev_cmd->add_option("--checkpoint", ev.checkpoint, "embed through this model first");
  ev_cmd->add_option("--output", ev.output, "JSON metrics file");
  ev_cmd->add_option("--per-query", ev.per_query, "per-query CSV");

  AblateArgs ab;
  ConfigFlags ab_cfg;
  auto* ab_cmd = app.add_subcommand("ablate", "sweep mu over several seeds");
  ab_cmd->add_option("--mu", ab.mu_list, "mu values, comma separated, e.g. 0,0.25,0.5,0.75,1")->required();
  ab_cmd->add_option("--seeds", ab.seeds, "seeds, comma separated")->delimiter(',')->capture_default_str();
  ab_cmd->add_option("--train", ab.train, "training feature file (default: synthetic data per seed)");
  ab_cmd->add_option("--query", ab.query, "query feature file");
  ab_cmd->add_option("--gallery", ab.gallery, "gallery feature file");
  ab_cmd->add_option("--out-dir", ab.out_dir, "output directory")->required();
  ab_cmd->add_flag("--deterministic", deterministic, "single-threaded");
  add_synth_flags(ab_cmd, ab.spec);
  ab_cfg.add(ab_cmd, {"mu", "seed"});

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (deterministic) set_thread_limit(1);
  try {
    if (*gen_cmd) return cmd_gen_data(gen);
    if (*clu_cmd) {
      validate_config(clu.cfg);
      return cmd_cluster(clu);
    }
    if (*tr_cmd) {
      tr.deterministic = deterministic;
      return cmd_train(tr, tr_cfg.resolve());
    }
    if (*ev_cmd) return cmd_evaluate(ev);
    if (*ab_cmd) return cmd_ablate(ab, ab_cfg.resolve());
  } catch (const UsageError& e) {
    return report("usage error", e, kExitUsage);
  } catch (const ConfigError& e) {
    return report("config error", e, kExitUsage);
  } catch (const IoError& e) {
    return report("I/O error", e, kExitIo);
  } catch (const FormatError& e) {
    return report("format error", e, kExitIo);
  } catch (const ValidationError& e) {
    return report("invalid input", e, kExitIo);
  } catch (const ClusteringCollapseError& e) {
    return report("clustering collapse", e, kExitCollapse);
  } catch (const ParameterError& e) {
    return report("invalid arguments", e, kExitUsage);
  } catch (const NumericError& e) {
    return report("numeric error", e, kExitNumeric);
  } catch (const EvaluationError& e) {
    return report("evaluation error", e, kExitNumeric);
  }
  return kExitUsage;
}

}  // namespace hhcl::cli
