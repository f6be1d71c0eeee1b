#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rirkit/blob.hpp"
#include "rirkit/crip.hpp"
#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kEmbeddings = "embeddings.f32";
constexpr const char* kRirs = "rirs.f32";
constexpr int kStoreVersion = 1;

}  // namespace

void save_store(const std::filesystem::path& dir, const EmbeddingStore& store) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  RIRKIT_REQUIRE(!ec, "store: cannot create directory '" + dir.string() + "': " + ec.message());

  const std::size_t n = store.size();
  FloatMatrix embeddings(n, n == 0 ? 0 : store.dim());
  std::size_t total = 0;
  for (const auto& e : store.entries()) total += e.rir.size();
  FloatMatrix rirs(total == 0 ? 0 : 1, total);

  nlohmann::ordered_json manifest;
  manifest["format"] = "rirkit-store";
  manifest["version"] = kStoreVersion;
  manifest["dim"] = store.dim();
  manifest["sample_rate"] = store.sample_rate();
  manifest["count"] = n;
  manifest["embeddings_file"] = kEmbeddings;
  manifest["rirs_file"] = kRirs;
  manifest["entries"] = nlohmann::json::array();

  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = store.entries()[i];
    for (std::size_t d = 0; d < store.dim(); ++d) {
      embeddings.at(i, d) = static_cast<float>(e.embedding.values[d]);
    }
    for (std::size_t s = 0; s < e.rir.size(); ++s) {
      rirs.data[offset + s] = static_cast<float>(e.rir[s]);
    }
    manifest["entries"].push_back({{"id", e.id},
                                   {"row", i},
                                   {"rir_offset", offset},
                                   {"rir_length", e.rir.size()},
                                   {"boundary", e.rir.boundary()}});
    offset += e.rir.size();
  }

  write_float_blob(dir / kEmbeddings, embeddings);
  write_float_blob(dir / kRirs, rirs);
  std::ofstream out(dir / kManifest);
  RIRKIT_REQUIRE(out.good(), "store: cannot write manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << "\n";
}

EmbeddingStore load_store(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifest);
  RIRKIT_REQUIRE(in.good(), "store: no manifest.json in '" + dir.string() + "'");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw_error(std::string("store manifest: ") + e.what());
  }

  try {
    RIRKIT_REQUIRE(manifest.at("format") == "rirkit-store", "store manifest: unknown format");
    RIRKIT_REQUIRE(manifest.at("version") == kStoreVersion, "store manifest: unsupported version");
    const auto dim = manifest.at("dim").get<std::size_t>();
    const auto rate = manifest.at("sample_rate").get<int>();
    const auto count = manifest.at("count").get<std::size_t>();
    EmbeddingStore store(dim, rate);

    const FloatMatrix embeddings =
        read_float_blob(dir / manifest.at("embeddings_file").get<std::string>());
    const FloatMatrix rirs = read_float_blob(dir / manifest.at("rirs_file").get<std::string>());
    RIRKIT_REQUIRE(embeddings.rows == count && (count == 0 || embeddings.cols == dim),
                   "store: embeddings blob shape does not match manifest");
    const auto& entries = manifest.at("entries");
    RIRKIT_REQUIRE(entries.size() == count, "store: manifest entry count mismatch");

    for (const auto& item : entries) {
      const auto row = item.at("row").get<std::size_t>();
      const auto offset = item.at("rir_offset").get<std::size_t>();
      const auto length = item.at("rir_length").get<std::size_t>();
      RIRKIT_REQUIRE(row < count && offset + length <= rirs.data.size(),
                     "store: manifest entry points outside the blobs");
      Embedding emb;
      const auto src = embeddings.row(row);
      emb.values.assign(src.begin(), src.end());
      std::vector<double> samples(rirs.data.begin() + static_cast<std::ptrdiff_t>(offset),
                                  rirs.data.begin() + static_cast<std::ptrdiff_t>(offset + length));
      store.add_entry(item.at("id").get<std::string>(), std::move(emb),
                      Rir(std::move(samples), rate, item.at("boundary").get<std::size_t>()));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw_error(std::string("store manifest: ") + e.what());
  }
}

}  // namespace rirkit
