#include "cited/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cited/error.hpp"

namespace cited {

using json = nlohmann::json;

std::string format_real(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::InvalidArgument,
            "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    require(static_cast<bool>(out), ErrorCode::InvalidArgument, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::MissingArtifact, "missing artifact: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(std::string_view s) {
  require(s.size() == 16, ErrorCode::ParseError, "commitment must be 16 hex digits");
  std::uint64_t v = 0;
  for (char ch : s) {
    int d;
    if (ch >= '0' && ch <= '9') d = ch - '0';
    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
    else fail(ErrorCode::ParseError, "bad hex digit in commitment");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

namespace {

// nlohmann prints the shortest round-trip form; artifacts want a fixed
// 17 significant digits, so floats are emitted by hand.
void emit(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      require(std::isfinite(v), ErrorCode::InvariantViolation, "non-finite value in artifact");
      out += format_real(v, 17);
      return;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        emit(e, out);
      }
      out += ']';
      return;
    }
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        emit(it.value(), out);
      }
      out += '}';
      return;
    }
    default:
      out += j.dump();
  }
}

std::string to_text(const json& j) {
  std::string out;
  emit(j, out);
  out += '\n';
  return out;
}

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (double v : m.row(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j, std::size_t rows, std::size_t cols, std::string_view name) {
  require(j.is_array() && j.size() == rows, ErrorCode::ParseError,
          std::string(name) + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j[i];
    require(row.is_array() && row.size() == cols, ErrorCode::ParseError,
            std::string(name) + ": expected " + std::to_string(cols) + " columns");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = row[c].get<double>();
  }
  return m;
}

json vector_json(const Matrix& bias) {
  json out = json::array();
  for (double v : bias.values()) out.push_back(v);
  return out;
}

Matrix bias_from(const json& j, std::size_t cols, std::string_view name) {
  require(j.is_array() && j.size() == cols, ErrorCode::ParseError,
          std::string(name) + ": expected " + std::to_string(cols) + " entries");
  Matrix m(1, cols);
  for (std::size_t c = 0; c < cols; ++c) m(0, c) = j[c].get<double>();
  return m;
}

}  // namespace

std::string dataset_to_json(const Dataset& ds) {
  const Graph& g = ds.graph;
  json j;
  j["n"] = g.num_nodes();
  j["c"] = g.num_classes();
  j["d0"] = g.feature_dim();
  json edges = json::array();
  for (const auto& [u, v] : g.edge_list()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  j["features"] = matrix_json(g.features());
  j["labels"] = g.labels();
  j["splits"] = {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}};
  j["meta"] = {{"seed", ds.seed}, {"generator", ds.generator}};
  return to_text(j);
}

Dataset dataset_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded("dataset", [&] {
    const auto n = j.at("n").get<std::size_t>();
    const auto c = j.at("c").get<std::size_t>();
    const auto d0 = j.at("d0").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, ErrorCode::ParseError, "dataset: edge must be [u,v]");
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    Dataset ds;
    ds.graph = build_graph(n, edges, matrix_from(j.at("features"), n, d0, "features"),
                           j.at("labels").get<std::vector<int>>(), c);
    const json& s = j.at("splits");
    ds.splits.train = s.at("train").get<std::vector<NodeId>>();
    ds.splits.val = s.at("val").get<std::vector<NodeId>>();
    ds.splits.test = s.at("test").get<std::vector<NodeId>>();
    validate_splits(ds.splits, n);
    ds.seed = j.at("meta").at("seed").get<std::uint64_t>();
    ds.generator = j.at("meta").at("generator").get<std::string>();
    return ds;
  });
}

void save_dataset(const fs::path& path, const Dataset& ds) { write_atomic(path, dataset_to_json(ds)); }
Dataset load_dataset(const fs::path& path) { return dataset_from_json(read_text(path)); }

std::string model_to_json(const ModelFile& m) {
  const ModelParams& p = m.params;
  json j;
  j["dims"] = {{"d0", p.input_dim()}, {"h", p.hidden_dim()}, {"c", p.num_classes()}};
  j["W1"] = matrix_json(p.W1);
  j["b1"] = vector_json(p.b1);
  j["W2"] = matrix_json(p.W2);
  j["b2"] = vector_json(p.b2);
  j["Wc"] = matrix_json(p.Wc);
  j["bc"] = vector_json(p.bc);
  j["seed"] = p.seed;
  j["provenance"] = std::string(to_string(p.provenance));
  j["training"] = {{"lr", m.training.lr},
                   {"wd", m.training.weight_decay},
                   {"epochs", m.training.epochs},
                   {"dropout", m.training.dropout}};
  return to_text(j);
}

ModelFile model_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded("model", [&] {
    const json& dims = j.at("dims");
    const auto d0 = dims.at("d0").get<std::size_t>();
    const auto h = dims.at("h").get<std::size_t>();
    const auto c = dims.at("c").get<std::size_t>();
    ModelFile m;
    m.params.W1 = matrix_from(j.at("W1"), d0, h, "W1");
    m.params.b1 = bias_from(j.at("b1"), h, "b1");
    m.params.W2 = matrix_from(j.at("W2"), h, h, "W2");
    m.params.b2 = bias_from(j.at("b2"), h, "b2");
    m.params.Wc = matrix_from(j.at("Wc"), h, c, "Wc");
    m.params.bc = bias_from(j.at("bc"), c, "bc");
    m.params.seed = j.at("seed").get<std::uint64_t>();
    m.params.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    m.params.validate();
    const json& t = j.at("training");
    m.training.lr = t.at("lr").get<double>();
    m.training.weight_decay = t.at("wd").get<double>();
    m.training.epochs = t.at("epochs").get<std::size_t>();
    m.training.dropout = t.at("dropout").get<double>();
    m.training.seed = m.params.seed;
    return m;
  });
}

void save_model(const fs::path& path, const ModelFile& m) { write_atomic(path, model_to_json(m)); }
ModelFile load_model(const fs::path& path) { return model_from_json(read_text(path)); }

std::string signature_to_json(const SignatureFile& s) {
  const BoundaryConfig& c = s.config;
  json j;
  j["indices"] = s.signature.indices;
  j["ref_embeddings"] = matrix_json(s.signature.ref_embeddings);
  j["ref_labels"] = s.signature.ref_labels;
  j["commitment"] = hex64(s.signature.commitment);
  j["config"] = {{"lambda", c.lambda},
                 {"boundary_ratio", c.boundary_ratio},
                 {"signature_ratio", c.signature_ratio},
                 {"w_margin", c.w_margin},
                 {"w_thickness", c.w_thickness},
                 {"w_hetero", c.w_hetero},
                 {"gamma", c.gamma},
                 {"margin_variant", std::string(to_string(c.margin_variant))}};
  return to_text(j);
}

SignatureFile signature_from_json(std::string_view text) {
  const json j = parse(text);
  SignatureFile s = guarded("signature", [&] {
    SignatureFile out;
    out.signature.indices = j.at("indices").get<std::vector<NodeId>>();
    const std::size_t k = out.signature.indices.size();
    const json& emb = j.at("ref_embeddings");
    const std::size_t h = k == 0 ? 0 : emb.at(0).size();
    out.signature.ref_embeddings = matrix_from(emb, k, h, "ref_embeddings");
    out.signature.ref_labels = j.at("ref_labels").get<std::vector<int>>();
    out.signature.commitment = parse_hex64(j.at("commitment").get<std::string>());
    const json& c = j.at("config");
    out.config.lambda = c.at("lambda").get<double>();
    out.config.boundary_ratio = c.at("boundary_ratio").get<double>();
    out.config.signature_ratio = c.at("signature_ratio").get<double>();
    out.config.w_margin = c.at("w_margin").get<double>();
    out.config.w_thickness = c.at("w_thickness").get<double>();
    out.config.w_hetero = c.at("w_hetero").get<double>();
    out.config.gamma = c.at("gamma").get<double>();
    out.config.margin_variant = margin_variant_from_string(c.at("margin_variant").get<std::string>());
    return out;
  });
  require(verify_commit(s.signature.indices, s.signature.commitment),
          ErrorCode::InvariantViolation, "signature commitment does not match its indices");
  s.signature.validate();
  return s;
}

void save_signature(const fs::path& path, const SignatureFile& s) {
  write_atomic(path, signature_to_json(s));
}
SignatureFile load_signature(const fs::path& path) { return signature_from_json(read_text(path)); }

std::string manifest_to_json(const std::vector<ManifestEntry>& entries) {
  json models = json::array();
  for (const ManifestEntry& e : entries) {
    models.push_back({{"id", e.id},
                      {"path", e.path},
                      {"provenance", std::string(to_string(e.provenance))},
                      {"seed", e.seed},
                      {"hidden", e.hidden},
                      {"level", std::string(to_string(e.level))},
                      {"removal", std::string(to_string(e.removal))}});
  }
  return to_text(json{{"models", std::move(models)}});
}

std::vector<ManifestEntry> manifest_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded("pool manifest", [&] {
    std::vector<ManifestEntry> out;
    for (const json& m : j.at("models")) {
      ManifestEntry e;
      e.id = m.at("id").get<std::string>();
      e.path = m.at("path").get<std::string>();
      e.provenance = provenance_from_string(m.at("provenance").get<std::string>());
      e.seed = m.at("seed").get<std::uint64_t>();
      e.hidden = m.at("hidden").get<std::size_t>();
      e.level = output_level_from_string(m.at("level").get<std::string>());
      e.removal = removal_from_string(m.at("removal").get<std::string>());
      out.push_back(std::move(e));
    }
    return out;
  });
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (const std::string& h : header) cell(std::string_view(h));
  end_row();
}

CsvWriter& CsvWriter::cell(std::string_view s) {
  if (pending_ > 0) out_ += ',';
  out_ += s;
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_real(v, 12))); }

void CsvWriter::end_row() {
  require(pending_ == width_, ErrorCode::ShapeMismatch,
          "CSV row has " + std::to_string(pending_) + " cells, header has " + std::to_string(width_));
  out_ += '\n';
  pending_ = 0;
}

}  // namespace cited
