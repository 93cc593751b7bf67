#pragma once

// Dataset ingestion (CSV, binary PGM/PPM), preprocessing and persistence of
// models and leaf codes.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ofae/codec.hpp"
#include "ofae/error.hpp"
#include "ofae/forest.hpp"
#include "ofae/numkit.hpp"
#include "ofae/otree.hpp"
#include "ofae/standardizer.hpp"

namespace ofae {

struct Dataset {
  Matrix x;
  std::optional<ImageShape> image_shape;  // (height, width, channels)
  std::vector<std::string> feature_names;

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t p() const noexcept { return x.cols(); }
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  if (tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV

inline Dataset parse_csv(std::string_view text, bool has_header) {
  Dataset d;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  bool header_pending = has_header;
  const auto lines = detail::lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = detail::trim(lines[ln]);
    if (line.empty()) continue;
    const auto toks = detail::split_commas(line);
    if (header_pending) {
      header_pending = false;
      for (auto t : toks) d.feature_names.emplace_back(t);
      cols = toks.size();
      continue;
    }
    if (cols == 0) cols = toks.size();
    if (toks.size() != cols) {
      throw Error(ErrorKind::RaggedRows, "line " + std::to_string(ln + 1) + " has " + std::to_string(toks.size()) +
                                             " fields, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < toks.size(); ++c) {
      auto v = detail::parse_double(toks[c]);
      if (!v) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(ln + 1) + ", column " + std::to_string(c + 1) +
                                               ": not a number: '" + std::string(toks[c]) + "'");
      }
      values.push_back(*v);
    }
    ++rows;
  }
  d.x = Matrix(rows, rows == 0 ? 0 : cols, std::move(values));
  return d;
}

inline Dataset read_csv(const std::filesystem::path& path, bool has_header) {
  return parse_csv(detail::read_file(path), has_header);
}

/// True when the first non-empty line contains a non-numeric field.
inline bool csv_has_header(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  for (auto line : detail::lines_of(text)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    for (auto tok : detail::split_commas(line))
      if (!detail::parse_double(tok)) return true;
    return false;
  }
  return false;
}

inline std::string format_double(double v) {
  // shortest form that round-trips exactly
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void write_csv(const std::filesystem::path& path, const Matrix& x,
                      const std::vector<std::string>& header = {}) {
  std::string out;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
    out += '\n';
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (c) out += ',';
      out += format_double(x(r, c));
    }
    out += '\n';
  }
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Leaf codes: one row per sample, one non-negative integer per tree.

inline void write_codes(const std::filesystem::path& path, const std::vector<LeafCode>& codes) {
  std::string out;
  for (const auto& code : codes) {
    for (std::size_t i = 0; i < code.leaves.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(code.leaves[i]);
    }
    out += '\n';
  }
  detail::write_file(path, out);
}

inline std::vector<LeafCode> read_codes(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<LeafCode> codes;
  const auto lines = detail::lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = detail::trim(lines[ln]);
    if (line.empty()) continue;
    LeafCode code;
    const auto toks = detail::split_commas(line);
    for (std::size_t c = 0; c < toks.size(); ++c) {
      std::size_t v = 0;
      const auto tok = toks[c];
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw Error(ErrorKind::ParseError, "codes line " + std::to_string(ln + 1) + ", column " +
                                               std::to_string(c + 1) + ": not a leaf id");
      }
      code.leaves.push_back(v);
    }
    if (!codes.empty() && code.leaves.size() != codes.front().leaves.size()) {
      throw Error(ErrorKind::RaggedRows, "codes line " + std::to_string(ln + 1) + " has a different width");
    }
    codes.push_back(std::move(code));
  }
  return codes;
}

// ---------------------------------------------------------------------------
// Binary PGM (P5) / PPM (P6), maxval 255

inline Dataset parse_image(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorKind::UnsupportedFormat, "only binary PGM (P5) and PPM (P6) are supported");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  auto next_token = [&]() -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw Error(ErrorKind::CorruptHeader, "expected a number in the image header");
    std::size_t v = 0;
    std::from_chars(bytes.data() + start, bytes.data() + pos, v);
    return v;
  };
  const std::size_t w = next_token();
  const std::size_t h = next_token();
  const std::size_t maxval = next_token();
  if (w == 0 || h == 0) throw Error(ErrorKind::CorruptHeader, "zero image dimension");
  if (maxval != 255) throw Error(ErrorKind::UnsupportedFormat, "maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw Error(ErrorKind::CorruptHeader, "missing whitespace after maxval");
  }
  ++pos;
  const std::size_t count = w * h * channels;
  if (bytes.size() - pos < count) throw Error(ErrorKind::CorruptHeader, "truncated pixel data");
  Matrix x(1, count);
  for (std::size_t i = 0; i < count; ++i) x(0, i) = static_cast<unsigned char>(bytes[pos + i]);
  return Dataset{std::move(x), ImageShape{h, w, channels}, {}};
}

inline Dataset read_image(const std::filesystem::path& path) { return parse_image(detail::read_file(path)); }

/// Serializes one image (pixels rounded half-up and clamped to [0, 255]).
inline std::string encode_image_bytes(std::span<const double> pixels, const ImageShape& shape) {
  const auto [h, w, c] = shape;
  if (c != 1 && c != 3) throw Error(ErrorKind::UnsupportedFormat, "images must have 1 or 3 channels");
  if (pixels.size() != h * w * c) throw Error(ErrorKind::ShapeMismatch, "pixel count differs from image shape");
  std::string out = (c == 1 ? "P5\n" : "P6\n") + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + pixels.size());
  for (double v : pixels) out += static_cast<char>(static_cast<unsigned char>(quantize_pixel(v)));
  return out;
}

inline void write_image(const std::filesystem::path& path, std::span<const double> pixels, const ImageShape& shape) {
  detail::write_file(path, encode_image_bytes(pixels, shape));
}

inline bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

/// Every PGM/PPM file of a directory, sorted by file name, one sample each.
inline Dataset read_image_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::IoError, "not a directory: " + dir.string());
  const auto files = list_images(dir);
  if (files.empty()) throw Error(ErrorKind::EmptyData, "no .pgm/.ppm files in " + dir.string());
  Dataset first = read_image(files.front());
  Matrix x(files.size(), first.p());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Dataset img = i == 0 ? first : read_image(files[i]);
    if (img.image_shape != first.image_shape) {
      throw Error(ErrorKind::ShapeMismatch, files[i].filename().string() + " differs in shape from " +
                                                files.front().filename().string());
    }
    std::copy(img.x.row(0).begin(), img.x.row(0).end(), x.row(i).begin());
  }
  return Dataset{std::move(x), first.image_shape, {}};
}

/// Bilinear resampling with corner-aligned sample positions
/// (source coordinate = i * (H - 1) / (H' - 1)); outputs clamped to [0, 255].
inline Dataset resize_bilinear(const Dataset& d, std::size_t new_h, std::size_t new_w) {
  if (!d.image_shape) throw Error(ErrorKind::NotAnImage, "resize_bilinear needs an image dataset");
  if (new_h == 0 || new_w == 0) throw Error(ErrorKind::ConfigInvalid, "resize target must be positive");
  const auto [h, w, c] = *d.image_shape;
  auto coord = [](std::size_t i, std::size_t src, std::size_t dst) {
    return dst <= 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(src - 1) / static_cast<double>(dst - 1);
  };
  Matrix out(d.n(), new_h * new_w * c);
  for (std::size_t s = 0; s < d.n(); ++s) {
    auto src = d.x.row(s);
    auto dst = out.row(s);
    for (std::size_t i = 0; i < new_h; ++i) {
      const double sy = coord(i, h, new_h);
      const std::size_t y0 = std::min(static_cast<std::size_t>(std::floor(sy)), h - 1);
      const std::size_t y1 = std::min(y0 + 1, h - 1);
      const double fy = sy - static_cast<double>(y0);
      for (std::size_t j = 0; j < new_w; ++j) {
        const double sx = coord(j, w, new_w);
        const std::size_t x0 = std::min(static_cast<std::size_t>(std::floor(sx)), w - 1);
        const std::size_t x1 = std::min(x0 + 1, w - 1);
        const double fx = sx - static_cast<double>(x0);
        for (std::size_t ch = 0; ch < c; ++ch) {
          auto px = [&](std::size_t yy, std::size_t xx) { return src[(yy * w + xx) * c + ch]; };
          const double v = (1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x1)) +
                           fy * ((1 - fx) * px(y1, x0) + fx * px(y1, x1));
          dst[(i * new_w + j) * c + ch] = std::clamp(v, 0.0, 255.0);
        }
      }
    }
  }
  return Dataset{std::move(out), ImageShape{new_h, new_w, c}, {}};
}

// ---------------------------------------------------------------------------
// Train / test split

struct SplitSpec {
  double test_size = 0.25;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_test;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> test_index;
};

/// Seeded Fisher-Yates shuffle, then the first n_test shuffled rows form the
/// test set and the next n_train the training set. With only test_size given,
/// n_test = ceil(test_size * n) and n_train = n - n_test. With one explicit
/// count, the other defaults to the remaining rows.
inline Split train_test_split(const Dataset& d, const SplitSpec& spec) {
  const std::size_t n = d.n();
  std::size_t n_test = 0;
  std::size_t n_train = 0;
  if (spec.n_train || spec.n_test) {
    if (spec.n_train && spec.n_test) {
      n_train = *spec.n_train;
      n_test = *spec.n_test;
    } else if (spec.n_train) {
      n_train = *spec.n_train;
      if (n_train > n) throw Error(ErrorKind::SizesExceedData, "n_train exceeds dataset size");
      n_test = n - n_train;
    } else {
      n_test = *spec.n_test;
      if (n_test > n) throw Error(ErrorKind::SizesExceedData, "n_test exceeds dataset size");
      n_train = n - n_test;
    }
  } else {
    if (!(spec.test_size >= 0.0 && spec.test_size < 1.0)) {
      throw Error(ErrorKind::ConfigInvalid, "test_size must be in [0, 1)");
    }
    n_test = static_cast<std::size_t>(std::ceil(spec.test_size * static_cast<double>(n) - 1e-9));
    n_train = n - n_test;
  }
  if (n_train + n_test > n) {
    throw Error(ErrorKind::SizesExceedData, "n_train + n_test = " + std::to_string(n_train + n_test) +
                                                " exceeds " + std::to_string(n) + " samples");
  }

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng = Rng(spec.seed).substream("split");
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  Split s;
  s.test_index.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train_index.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test),
                       perm.begin() + static_cast<std::ptrdiff_t>(n_test + n_train));
  s.train = Dataset{d.x.select_rows(s.train_index), d.image_shape, d.feature_names};
  s.test = Dataset{d.x.select_rows(s.test_index), d.image_shape, d.feature_names};
  return s;
}

// ---------------------------------------------------------------------------
// Model persistence (JSON, sorted keys, shortest round-trip numbers)

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

[[noreturn]] inline void schema_fail(const std::string& msg) { throw Error(ErrorKind::SchemaError, msg); }

template <typename T>
T get_as(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_fail(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    schema_fail(std::string("field '") + key + "': " + e.what());
  }
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) schema_fail("matrix must be an array of rows");
  std::vector<Vector> rows;
  try {
    for (const auto& r : j) rows.push_back(r.get<Vector>());
  } catch (const json::exception& e) {
    schema_fail(std::string("matrix: ") + e.what());
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const Error&) {
    schema_fail("ragged matrix");
  }
}

inline std::optional<std::size_t> opt_index(const json& j, const char* key) {
  if (!j.contains(key)) schema_fail(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_unsigned()) schema_fail(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace detail

inline nlohmann::json config_to_json(const ForestConfig& c) {
  return {{"tree_kind", std::string(to_string(c.tree_kind))},
          {"transform", std::string(to_string(c.transform))},
          {"n_estimators", c.n_estimators},
          {"max_depth", c.max_depth},
          {"max_samples", c.max_samples},
          {"max_features", c.max_features},
          {"seed", c.seed}};
}

inline ForestConfig config_from_json(const nlohmann::json& j) {
  using detail::get_as;
  ForestConfig c;
  const auto kind = parse_tree_kind(get_as<std::string>(j, "tree_kind"));
  const auto transform = parse_transform(get_as<std::string>(j, "transform"));
  if (!kind) detail::schema_fail("unknown tree_kind");
  if (!transform) detail::schema_fail("unknown transform");
  c.tree_kind = *kind;
  c.transform = *transform;
  c.n_estimators = get_as<std::size_t>(j, "n_estimators");
  c.max_depth = get_as<std::size_t>(j, "max_depth");
  c.max_samples = get_as<double>(j, "max_samples");
  c.max_features = get_as<double>(j, "max_features");
  c.seed = get_as<std::uint64_t>(j, "seed");
  return c;
}

inline nlohmann::json model_to_json(const ForestModel& m) {
  using nlohmann::json;
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
      json weights = json::array();
      for (const auto& [i, w] : n.weights) weights.push_back(json::array({i, w}));
      auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
      nodes.push_back({{"id", n.id},
                       {"weights", weights},
                       {"threshold", n.threshold},
                       {"left", opt(n.left)},
                       {"right", opt(n.right)},
                       {"leaf_id", opt(n.leaf_id)}});
    }
    json tree = {{"kind", std::string(to_string(t.kind()))}, {"feature_subset", t.feature_subset()}, {"nodes", nodes}};
    if (t.rotation()) tree["rotation"] = detail::matrix_to_json(*t.rotation());
    trees.push_back(std::move(tree));
  }
  json doc = {{"format_version", kModelFormatVersion},
              {"config", config_to_json(m.config)},
              {"p", m.p},
              {"standardizer", nullptr},
              {"channel_tag", nullptr},
              {"image_shape", nullptr},
              {"trees", trees}};
  if (m.standardizer) doc["standardizer"] = {{"mean", m.standardizer->mean}, {"std", m.standardizer->std}};
  if (m.channel_tag) doc["channel_tag"] = std::string(to_string(*m.channel_tag));
  if (m.image_shape) doc["image_shape"] = *m.image_shape;
  return doc;
}

inline std::string model_to_string(const ForestModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline ForestModel model_from_json(const nlohmann::json& doc) {
  using detail::get_as;
  using detail::schema_fail;
  if (!doc.is_object()) schema_fail("model document must be an object");
  const int version = get_as<int>(doc, "format_version");
  if (version != kModelFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, "model format_version " + std::to_string(version) + ", expected " +
                                                std::to_string(kModelFormatVersion));
  }
  ForestModel m;
  if (!doc.contains("config")) schema_fail("missing field 'config'");
  m.config = config_from_json(doc.at("config"));
  try {
    m.config.validate();
  } catch (const Error& e) {
    schema_fail(std::string("config: ") + e.what());
  }
  m.p = get_as<std::size_t>(doc, "p");

  if (doc.contains("standardizer") && !doc.at("standardizer").is_null()) {
    const auto& s = doc.at("standardizer");
    Standardizer st{get_as<Vector>(s, "mean"), get_as<Vector>(s, "std")};
    if (st.mean.size() != m.p || st.std.size() != m.p) schema_fail("standardizer dimension differs from p");
    for (double v : st.std)
      if (!(v > 0.0)) schema_fail("standardizer std must be positive");
    m.standardizer = std::move(st);
  }
  if (doc.contains("channel_tag") && !doc.at("channel_tag").is_null()) {
    auto tag = parse_channel_tag(get_as<std::string>(doc, "channel_tag"));
    if (!tag) schema_fail("unknown channel_tag");
    m.channel_tag = *tag;
  }
  if (doc.contains("image_shape") && !doc.at("image_shape").is_null()) {
    m.image_shape = get_as<ImageShape>(doc, "image_shape");
    const auto& s = *m.image_shape;
    if (s[0] * s[1] != m.p || (s[2] != 1 && s[2] != 3)) schema_fail("image_shape inconsistent with p");
  }

  if (!doc.contains("trees") || !doc.at("trees").is_array()) schema_fail("missing trees array");
  for (const auto& tj : doc.at("trees")) {
    const auto kind = parse_tree_kind(get_as<std::string>(tj, "kind"));
    if (!kind) schema_fail("unknown tree kind");
    auto subset = get_as<std::vector<std::size_t>>(tj, "feature_subset");
    for (auto f : subset)
      if (f >= m.p) schema_fail("feature_subset index out of range");
    std::optional<Matrix> rotation;
    if (tj.contains("rotation") && !tj.at("rotation").is_null()) rotation = detail::matrix_from_json(tj.at("rotation"));
    if (!tj.contains("nodes") || !tj.at("nodes").is_array()) schema_fail("tree without nodes array");
    std::vector<ObliqueNode> nodes;
    for (const auto& nj : tj.at("nodes")) {
      ObliqueNode n;
      n.id = get_as<std::size_t>(nj, "id");
      n.threshold = get_as<double>(nj, "threshold");
      n.left = detail::opt_index(nj, "left");
      n.right = detail::opt_index(nj, "right");
      n.leaf_id = detail::opt_index(nj, "leaf_id");
      if (!nj.contains("weights") || !nj.at("weights").is_array()) schema_fail("node without weights array");
      for (const auto& wj : nj.at("weights")) {
        if (!wj.is_array() || wj.size() != 2 || !wj[0].is_number_unsigned() || !wj[1].is_number()) {
          schema_fail("weights must be [index, value] pairs");
        }
        const auto idx = wj[0].get<std::size_t>();
        if (idx >= m.p) schema_fail("weight index out of range");
        n.weights.emplace_back(idx, wj[1].get<double>());
      }
      nodes.push_back(std::move(n));
    }
    m.trees.emplace_back(*kind, std::move(subset), std::move(nodes), std::move(rotation));
  }
  if (m.trees.size() != m.config.n_estimators) schema_fail("tree count differs from n_estimators");
  return m;
}

inline ForestModel model_from_string(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

inline void save_model(const std::filesystem::path& path, const ForestModel& m) {
  detail::write_file(path, model_to_string(m));
}

inline ForestModel load_model(const std::filesystem::path& path) { return model_from_string(detail::read_file(path)); }

}  // namespace ofae
