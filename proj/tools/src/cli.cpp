#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rirkit/rirkit.hpp"

namespace rirkit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Argument combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  RIRKIT_REQUIRE(in, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("'" + path.string() + "': " + e.what());
  }
}

/// Infinite or NaN values become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Embedding read_embedding(const fs::path& path) {
  const auto m = read_float_blob(path);
  RIRKIT_REQUIRE(!m.data.empty(), "'" + path.string() + "': empty embedding");
  return Embedding{std::vector<double>(m.data.begin(), m.data.end())};
}

Vec3 read_vec3(const json& j, const char* key) {
  RIRKIT_REQUIRE(j.contains(key) && j[key].is_array() && j[key].size() == 3,
                 std::string("room: '") + key + "' must be a 3-element array");
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

WavFormat wav_format(bool pcm16) { return pcm16 ? WavFormat::Pcm16 : WavFormat::Float32; }

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string rir;
  std::string gt;
  std::optional<std::size_t> boundary;
};

void cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto h = Rir::from_audio(read_wav(fs::path(a.rir)), a.boundary);
  if (a.gt.empty()) {
    const auto d = drr(h);
    json j{{"t60", t60(h)}, {"edt", edt(h)}, {"drr", d.unbounded ? json(nullptr) : json(d.db)},
           {"drr_unbounded", d.unbounded}};
    out << j.dump() << '\n';
    return;
  }
  const auto gt = Rir::from_audio(read_wav(fs::path(a.gt)), a.boundary);
  out << to_json(acoustic_error_report(h, gt)) << '\n';
}

// ----------------------------------------------------------------- reverb

struct ReverbArgs {
  std::string clean, rir, output;
  bool normalize = false;
  bool pcm16 = false;
};

void cmd_reverb(const ReverbArgs& a, std::ostream& out) {
  const auto clean = read_wav(fs::path(a.clean));
  const auto rir = read_wav(fs::path(a.rir));
  RIRKIT_REQUIRE(clean.sample_rate() == rir.sample_rate(), "reverb: sample-rate mismatch");
  auto y = convolve(clean, rir);
  double peak = 0.0;
  for (double s : y.samples()) peak = std::max(peak, std::abs(s));
  if (a.normalize && peak > 0.0) y = scale(y, 1.0 / peak);
  write_wav(fs::path(a.output), y, wav_format(a.pcm16));
  json j{{"output", a.output}, {"samples", y.size()}, {"peak", peak}, {"normalized", a.normalize}};
  out << j.dump() << '\n';
}

// ----------------------------------------------------------------- losses

struct LossArgs {
  std::string est_reverb, reverb, est_clean, clean, est_rir, rir, scores;
  double lambda1 = 1.0, lambda2 = 1.0;
  double vq1 = 0.0, vq2 = 0.0;
};

void cmd_losses(const LossArgs& a, std::ostream& out) {
  const auto er = read_wav(fs::path(a.est_reverb));
  const auto r = read_wav(fs::path(a.reverb));
  const auto ec = read_wav(fs::path(a.est_clean));
  const auto c = read_wav(fs::path(a.clean));
  const auto eh = Rir::from_audio(read_wav(fs::path(a.est_rir)));
  const auto h = Rir::from_audio(read_wav(fs::path(a.rir)));
  const LossWeights w{a.lambda1, a.lambda2};

  const double mel = mel_loss(er, r, ec, c);
  const auto stft = stft_loss(er, r, ec, c);
  const double mse = rir_mse(eh, h);
  const double metric = metric_loss(mel, stft.total, mse, w);

  json adversarial = nullptr, generator = nullptr;
  if (!a.scores.empty()) {
    const auto j = read_json_file(a.scores);
    DiscriminatorScores s;
    try {
      s.reverberant = j.at("reverberant").get<std::vector<double>>();
      s.clean = j.at("clean").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw Error("'" + a.scores + "': " + e.what());
    }
    const double adv = adversarial_hinge_loss(s);
    adversarial = adv;
    generator = generator_total_loss(metric, adv, a.vq1, a.vq2, w);
  }
  json j{{"mel", mel},         {"stft_mag", stft.magnitude}, {"stft_phase", stft.phase},
         {"rir_mse", mse},     {"metric", metric},           {"adversarial", adversarial},
         {"generator", generator}};
  out << j.dump() << '\n';
}

// -------------------------------------------------------------------- rvq

struct RvqTrainArgs {
  std::string data, output, log;
  std::size_t layers = 64, codebook = 8192, steps = 0, batch = 0;
  double decay = 0.99, beta = 0.25;
  std::uint64_t seed = 0;
};

FloatMatrix sample_rows(const FloatMatrix& data, std::size_t n, std::mt19937_64& rng) {
  FloatMatrix batch(n, data.cols);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = data.row(rng() % data.rows);
    std::copy(src.begin(), src.end(), batch.row(i).begin());
  }
  return batch;
}

double reconstruction_mse(const RvqCodec& codec, const FloatMatrix& data) {
  const auto recon = codec.decode(codec.encode_batch(data));
  double acc = 0.0;
  for (std::size_t i = 0; i < data.data.size(); ++i) {
    const double d = static_cast<double>(recon.data[i]) - data.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(data.data.size());
}

void cmd_rvq_train(const RvqTrainArgs& a, std::ostream& out) {
  const auto data = read_float_blob(fs::path(a.data));
  RIRKIT_REQUIRE(data.rows >= 1 && data.cols >= 1, "rvq train: empty training data");
  RvqConfig cfg;
  cfg.num_layers = a.layers;
  cfg.codebook_size = a.codebook;
  cfg.dim = data.cols;
  cfg.ema_decay = a.decay;
  cfg.commitment_beta = a.beta;
  cfg.seed = a.seed;
  auto codec = RvqCodec::create(cfg, data);

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    RIRKIT_REQUIRE(log, "cannot write '" + a.log + "'");
  }
  // Minibatches draw from their own stream so the codebook init is unaffected.
  std::mt19937_64 rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
  RvqTrainStats stats;
  for (std::size_t step = 1; step <= a.steps; ++step) {
    stats = a.batch == 0 ? codec.train_step(data) : codec.train_step(sample_rows(data, a.batch, rng));
    if (log.is_open()) {
      log << json{{"step", step},
                  {"vq_loss", stats.vq_loss},
                  {"commitment_loss", stats.commitment_loss},
                  {"reseeded", stats.reseeded}}
                 .dump()
          << '\n';
    }
  }
  codec.save(fs::path(a.output));
  json j{{"checkpoint", a.output},
         {"steps", a.steps},
         {"final_vq_loss", number_or_null(a.steps == 0 ? NAN : stats.vq_loss)},
         {"reconstruction_mse", reconstruction_mse(codec, data)}};
  out << j.dump() << '\n';
}

struct RvqCodeArgs {
  std::string checkpoint, input, output;
  std::optional<std::size_t> layers;
};

void cmd_rvq_encode(const RvqCodeArgs& a, std::ostream& out) {
  const auto codec = RvqCodec::load(fs::path(a.checkpoint));
  const auto data = read_float_blob(fs::path(a.input));
  auto codes = codec.encode_batch(data);
  if (a.layers) {
    if (*a.layers < 1 || *a.layers > codes.cols) {
      throw UsageError("rvq encode: --layers must be in [1, " + std::to_string(codes.cols) + "]");
    }
    IntMatrix cut(codes.rows, *a.layers);
    for (std::size_t i = 0; i < codes.rows; ++i) {
      std::copy_n(codes.row(i).begin(), *a.layers, cut.row(i).begin());
    }
    codes = std::move(cut);
  }
  write_int_blob(fs::path(a.output), codes);
  out << json{{"output", a.output}, {"rows", codes.rows}, {"layers", codes.cols}}.dump() << '\n';
}

void cmd_rvq_decode(const RvqCodeArgs& a, std::ostream& out) {
  const auto codec = RvqCodec::load(fs::path(a.checkpoint));
  const auto codes = read_int_blob(fs::path(a.input));
  const auto recon = codec.decode(codes, a.layers);
  write_float_blob(fs::path(a.output), recon);
  out << json{{"output", a.output}, {"rows", recon.rows}, {"dim", recon.cols}}.dump() << '\n';
}

struct BitrateArgs {
  std::size_t layers = 64, codebook = 8192;
  double fps = 0.0;
};

void cmd_rvq_bitrate(const BitrateArgs& a, std::ostream& out) {
  RvqConfig cfg;
  cfg.num_layers = a.layers;
  cfg.codebook_size = a.codebook;
  out << std::llround(bitrate(cfg, a.fps)) << '\n';
}

// ----------------------------------------------------------------- geomat

struct GeomatArgs {
  std::string seg, labels, depth, db, output;
};

void cmd_geomat_build(const GeomatArgs& a, std::ostream& out) {
  SegmentationMap seg{read_pgm(fs::path(a.seg)), read_label_names(fs::path(a.labels))};
  const auto depth = read_depth_raster(fs::path(a.depth));
  const auto db = read_absorption_db(fs::path(a.db));
  const auto map = build_geomat(seg, depth, db);
  write_geomat(fs::path(a.output), map);
  json materials = json::object();
  for (const auto& [label, name] : seg.label_names) {
    materials[std::to_string(label)] = match_material(name, db).material_name;
  }
  json j{{"output", a.output},
         {"height", map.height},
         {"width", map.width},
         {"depth_scale", map.depth_scale},
         {"materials", materials}};
  out << j.dump() << '\n';
}

// ------------------------------------------------------------------ store

struct StoreBuildArgs {
  std::string manifest, output;
  std::optional<std::size_t> dim;
};

/// Manifest: [{"id": ..., "embedding": "<float blob>", "rir": "<wav>"}, ...]
/// with paths relative to the manifest's directory.
void cmd_store_build(const StoreBuildArgs& a, std::ostream& out) {
  const fs::path manifest(a.manifest);
  const auto j = read_json_file(manifest);
  RIRKIT_REQUIRE(j.is_array(), "'" + a.manifest + "': expected an array of entries");
  const auto base = manifest.parent_path();
  std::vector<StoreEntry> entries;
  for (const auto& e : j) {
    try {
      const auto id = e.at("id").get<std::string>();
      entries.push_back({id, read_embedding(base / e.at("embedding").get<std::string>()),
                         Rir::from_audio(read_wav(base / e.at("rir").get<std::string>()))});
    } catch (const json::exception& ex) {
      throw Error("'" + a.manifest + "': " + ex.what());
    }
  }
  std::size_t dim = a.dim.value_or(entries.empty() ? kDefaultEmbeddingDim : entries.front().embedding.size());
  EmbeddingStore store(dim);
  for (auto& e : entries) store.add_entry(std::move(e.id), std::move(e.embedding), std::move(e.rir));
  save_store(fs::path(a.output), store);
  out << json{{"store", a.output}, {"entries", store.size()}, {"dim", store.dim()}}.dump() << '\n';
}

struct StoreQueryArgs {
  std::string store, embedding;
  std::size_t k = 5;
};

void cmd_store_query(const StoreQueryArgs& a, std::ostream& out) {
  const auto store = load_store(fs::path(a.store));
  const auto hits = store.retrieve(read_embedding(fs::path(a.embedding)), a.k);
  json list = json::array();
  for (const auto& h : hits) list.push_back({{"id", h.id}, {"similarity", h.similarity}});
  out << json{{"hits", list}}.dump() << '\n';
}

struct StoreSpliceArgs {
  std::string store, embedding, est, output;
  std::size_t boundary = kDefaultEarlyLateBoundary;
  std::size_t end = 2 * kDefaultEarlyLateBoundary;
  bool additive = false;
  bool pcm16 = false;
};

void cmd_store_splice(const StoreSpliceArgs& a, std::ostream& out) {
  const auto store = load_store(fs::path(a.store));
  const auto est = Rir::from_audio(read_wav(fs::path(a.est)));
  const SpliceConfig cfg{a.boundary, a.end, a.additive ? SpliceMode::Add : SpliceMode::Replace};
  const auto result = assemble_estimate(est, store, read_embedding(fs::path(a.embedding)), cfg);
  write_wav(fs::path(a.output), result.rir.to_audio(), wav_format(a.pcm16));
  json j{{"output", a.output}, {"retrieved_id", result.retrieved_id}, {"similarity", result.similarity}};
  out << j.dump() << '\n';
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string room, output;
  bool pcm16 = false;
};

/// Room JSON: dims, absorption (scalar or 6 walls), source, listener and
/// optional speed_of_sound, max_order, rir_len, highpass_hz.
void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto j = read_json_file(a.room);
  RIRKIT_REQUIRE(j.is_object(), "'" + a.room + "': expected an object");
  ShoeboxRoom room;
  SimParams params;
  Vec3 source, listener;
  try {
    room.dims = read_vec3(j, "dims");
    room.speed_of_sound = j.value("speed_of_sound", room.speed_of_sound);
    const auto& alpha = j.at("absorption");
    if (alpha.is_number()) {
      room.wall_absorption.fill(alpha.get<double>());
    } else {
      RIRKIT_REQUIRE(alpha.is_array() && alpha.size() == 6, "room: 'absorption' must be a number or 6 values");
      for (std::size_t i = 0; i < 6; ++i) room.wall_absorption[i] = alpha[i].get<double>();
    }
    source = read_vec3(j, "source");
    listener = read_vec3(j, "listener");
    params.max_order = j.value("max_order", params.max_order);
    params.rir_len = j.value("rir_len", params.rir_len);
    params.highpass_hz = j.value("highpass_hz", params.highpass_hz);
  } catch (const json::exception& e) {
    throw Error("'" + a.room + "': " + e.what());
  }
  const auto h = simulate_rir(room, source, listener, params);
  write_wav(fs::path(a.output), h.to_audio(), wav_format(a.pcm16));
  const double delay = distance(source, listener) / room.speed_of_sound * params.sample_rate;
  json r{{"output", a.output},
         {"samples", h.size()},
         {"direct_sample", std::llround(delay)},
         {"sabine_t60", sabine_t60(room)}};
  out << r.dump() << '\n';
}

void print_error(std::ostream& err, const std::string& message, int code) {
  err << json{{"error", message}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Room impulse response toolkit", "rirkit"};
  app.require_subcommand(1);
  std::function<void()> action;

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "T60/EDT/DRR of a RIR, or the error report against --gt");
  an->add_option("rir", analyze.rir, "RIR WAV")->required();
  an->add_option("--gt", analyze.gt, "ground-truth RIR WAV");
  an->add_option("--boundary", analyze.boundary, "early/late boundary in samples");
  an->callback([&] { action = [&] { cmd_analyze(analyze, out); }; });

  ReverbArgs reverb;
  auto* rv = app.add_subcommand("reverb", "convolve clean speech with a RIR");
  rv->add_option("clean", reverb.clean, "clean WAV")->required();
  rv->add_option("rir", reverb.rir, "RIR WAV")->required();
  rv->add_option("-o,--output", reverb.output, "output WAV")->required();
  rv->add_flag("--normalize", reverb.normalize, "peak-normalize the output");
  rv->add_flag("--pcm16", reverb.pcm16, "write 16-bit PCM instead of float32");
  rv->callback([&] { action = [&] { cmd_reverb(reverb, out); }; });

  LossArgs losses;
  auto* lo = app.add_subcommand("losses", "metric and generator losses as JSON");
  lo->add_option("--est-reverb", losses.est_reverb, "estimated reverberant WAV")->required();
  lo->add_option("--reverb", losses.reverb, "reference reverberant WAV")->required();
  lo->add_option("--est-clean", losses.est_clean, "estimated clean WAV")->required();
  lo->add_option("--clean", losses.clean, "reference clean WAV")->required();
  lo->add_option("--est-rir", losses.est_rir, "estimated RIR WAV")->required();
  lo->add_option("--rir", losses.rir, "reference RIR WAV")->required();
  lo->add_option("--scores", losses.scores, "discriminator scores JSON {reverberant, clean}");
  lo->add_option("--lambda1", losses.lambda1, "STFT / adversarial weight");
  lo->add_option("--lambda2", losses.lambda2, "RIR MSE / VQ weight");
  lo->add_option("--vq1", losses.vq1, "speech-codec VQ loss");
  lo->add_option("--vq2", losses.vq2, "RIR-codec VQ loss");
  lo->callback([&] { action = [&] { cmd_losses(losses, out); }; });

  auto* rvq = app.add_subcommand("rvq", "residual vector quantizer");
  rvq->require_subcommand(1);

  RvqTrainArgs train;
  auto* tr = rvq->add_subcommand("train", "EMA-train a codec on a float blob");
  tr->add_option("--data", train.data, "training vectors (float blob, rows x dim)")->required();
  tr->add_option("-o,--output", train.output, "checkpoint path")->required();
  tr->add_option("--seed", train.seed, "RNG seed")->required();
  tr->add_option("--steps", train.steps, "EMA steps")->required();
  tr->add_option("--layers", train.layers, "quantizer layers")->check(CLI::PositiveNumber);
  tr->add_option("--codebook", train.codebook, "entries per layer")->check(CLI::PositiveNumber);
  tr->add_option("--batch", train.batch, "rows per step, 0 = full data");
  tr->add_option("--decay", train.decay, "EMA decay");
  tr->add_option("--beta", train.beta, "commitment weight");
  tr->add_option("--log", train.log, "per-step JSON-lines log");
  tr->callback([&] { action = [&] { cmd_rvq_train(train, out); }; });

  RvqCodeArgs encode;
  auto* en = rvq->add_subcommand("encode", "vectors to codes");
  en->add_option("--checkpoint", encode.checkpoint, "codec checkpoint")->required();
  en->add_option("--data", encode.input, "vectors (float blob)")->required();
  en->add_option("-o,--output", encode.output, "codes (int blob)")->required();
  en->add_option("--layers", encode.layers, "keep the first n layers");
  en->callback([&] { action = [&] { cmd_rvq_encode(encode, out); }; });

  RvqCodeArgs decode;
  auto* de = rvq->add_subcommand("decode", "codes to vectors");
  de->add_option("--checkpoint", decode.checkpoint, "codec checkpoint")->required();
  de->add_option("--codes", decode.input, "codes (int blob)")->required();
  de->add_option("-o,--output", decode.output, "vectors (float blob)")->required();
  de->add_option("--layers", decode.layers, "decode the first n layers");
  de->callback([&] { action = [&] { cmd_rvq_decode(decode, out); }; });

  BitrateArgs rate;
  auto* br = rvq->add_subcommand("bitrate", "bits per second of a codec configuration");
  br->add_option("--layers", rate.layers, "quantizer layers");
  br->add_option("--codebook", rate.codebook, "entries per layer");
  br->add_option("--fps", rate.fps, "code frames per second")->required();
  br->callback([&] { action = [&] { cmd_rvq_bitrate(rate, out); }; });

  auto* geo = app.add_subcommand("geomat", "Geo-Mat feature maps");
  geo->require_subcommand(1);
  GeomatArgs geomat;
  auto* gb = geo->add_subcommand("build", "segmentation + depth to a packed PNG");
  gb->add_option("--seg", geomat.seg, "label map (PGM)")->required();
  gb->add_option("--labels", geomat.labels, "label names JSON")->required();
  gb->add_option("--depth", geomat.depth, "depth raster (float blob, meters)")->required();
  gb->add_option("--db", geomat.db, "absorption database JSON")->required();
  gb->add_option("-o,--output", geomat.output, "output PNG")->required();
  gb->callback([&] { action = [&] { cmd_geomat_build(geomat, out); }; });

  auto* st = app.add_subcommand("store", "embedding/RIR datastore");
  st->require_subcommand(1);

  StoreBuildArgs sbuild;
  auto* sb = st->add_subcommand("build", "ingest (id, embedding, rir) triples");
  sb->add_option("--manifest", sbuild.manifest, "triples JSON")->required();
  sb->add_option("-o,--output", sbuild.output, "store directory")->required();
  sb->add_option("--dim", sbuild.dim, "embedding dimension (default: first entry)");
  sb->callback([&] { action = [&] { cmd_store_build(sbuild, out); }; });

  StoreQueryArgs squery;
  auto* sq = st->add_subcommand("query", "top-k ids by cosine similarity");
  sq->add_option("--store", squery.store, "store directory")->required();
  sq->add_option("--embedding", squery.embedding, "query embedding (float blob)")->required();
  sq->add_option("-k,--k", squery.k, "number of hits")->check(CLI::PositiveNumber);
  sq->callback([&] { action = [&] { cmd_store_query(squery, out); }; });

  StoreSpliceArgs ssplice;
  auto* ss = st->add_subcommand("splice", "replace the late part of an estimate with the top hit");
  ss->add_option("--store", ssplice.store, "store directory")->required();
  ss->add_option("--embedding", ssplice.embedding, "query embedding (float blob)")->required();
  ss->add_option("--est", ssplice.est, "estimated RIR WAV")->required();
  ss->add_option("-o,--output", ssplice.output, "output WAV")->required();
  ss->add_option("--boundary", ssplice.boundary, "splice start sample");
  ss->add_option("--end", ssplice.end, "splice end sample");
  ss->add_flag("--additive", ssplice.additive, "add the retrieved tail instead of replacing");
  ss->add_flag("--pcm16", ssplice.pcm16, "write 16-bit PCM instead of float32");
  ss->callback([&] { action = [&] { cmd_store_splice(ssplice, out); }; });

  SimulateArgs sim;
  auto* si = app.add_subcommand("simulate", "image-source shoebox RIR");
  si->add_option("--room", sim.room, "room JSON")->required();
  si->add_option("-o,--output", sim.output, "output WAV")->required();
  si->add_flag("--pcm16", sim.pcm16, "write 16-bit PCM instead of float32");
  si->callback([&] { action = [&] { cmd_simulate(sim, out); }; });

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    action();
  } catch (const UsageError& e) {
    print_error(err, e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error(err, e.what(), kExitData);
    return kExitData;
  }
  return kExitOk;
}

}  // namespace rirkit::cli
