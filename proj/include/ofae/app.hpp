#pragma once

// Command implementations behind the `ofae` executable. Each command returns
// the process exit status:
//   0 success, 2 configuration error, 3 data error, 4 model/data mismatch,
//   5 at least one sample failed to decode (the rest of the batch completes).

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofae/codec.hpp"
#include "ofae/dataio.hpp"
#include "ofae/error.hpp"
#include "ofae/forest.hpp"
#include "ofae/metrics.hpp"
#include "ofae/parallel.hpp"

namespace ofae::app {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kMismatch = 4, kPartialDecode = 5 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid:
      return kConfig;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::ChannelMismatch:
    case ErrorKind::UnknownLeaf:
      return kMismatch;
    case ErrorKind::InfeasibleCode:
    case ErrorKind::IterationLimit:
      return kPartialDecode;
    case ErrorKind::EmptyData:
    case ErrorKind::ParseError:
    case ErrorKind::RaggedRows:
    case ErrorKind::UnsupportedFormat:
    case ErrorKind::CorruptHeader:
    case ErrorKind::NotAnImage:
    case ErrorKind::SizesExceedData:
    case ErrorKind::VersionMismatch:
    case ErrorKind::SchemaError:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::IoError:
    case ErrorKind::TooFewSamples:
    case ErrorKind::LengthMismatch:
      return kData;
    default:
      return kInternal;
  }
}

// ---------------------------------------------------------------------------
// Run configuration

enum class InputKind { csv, image_dir };
enum class BoxMode { none, pixels };

struct RunConfig {
  ForestConfig forest;
  std::optional<std::string> input;
  std::optional<InputKind> input_kind;  // inferred from the path when absent
  std::optional<bool> has_header;       // sniffed when absent
  bool standardize = false;
  std::optional<BoxMode> box_mode;  // pixels for images, none otherwise
  SplitSpec split;
  std::optional<std::array<std::size_t, 2>> resize;  // (height, width)
  std::optional<std::string> model;
  std::optional<std::string> codes;
  std::optional<std::string> output;
  std::size_t workers = 1;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); }

inline const std::set<std::string>& integer_keys() {
  static const std::set<std::string> k{"n_estimators", "max_depth", "n_train", "n_test", "seed", "workers"};
  return k;
}
inline const std::set<std::string>& real_keys() {
  static const std::set<std::string> k{"max_samples", "max_features", "test_size"};
  return k;
}
inline const std::set<std::string>& bool_keys() {
  static const std::set<std::string> k{"standardize", "has_header"};
  return k;
}
inline const std::set<std::string>& string_keys() {
  static const std::set<std::string> k{"tree_kind", "transform", "box_mode", "input", "input_kind",
                                       "model",     "codes",     "output"};
  return k;
}

inline bool known_key(const std::string& key) {
  return integer_keys().count(key) || real_keys().count(key) || bool_keys().count(key) ||
         string_keys().count(key) || key == "resize";
}

/// Converts a command-line string to the JSON type the config key expects.
inline json value_from_flag(const std::string& key, const std::string& text) {
  if (integer_keys().count(key)) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      config_fail("--" + key + " expects a non-negative integer, got '" + text + "'");
    }
    return v;
  }
  if (real_keys().count(key)) {
    const auto v = ofae::detail::parse_double(text);
    if (!v) config_fail("--" + key + " expects a number, got '" + text + "'");
    return *v;
  }
  if (bool_keys().count(key)) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    config_fail("--" + key + " expects true or false, got '" + text + "'");
  }
  return text;
}

template <typename T>
T typed(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) config_fail("'" + key + "' must be true or false");
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) config_fail("'" + key + "' must be a string");
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) config_fail("'" + key + "' must be a number");
    return v.get<double>();
  } else {
    if (!v.is_number_unsigned()) config_fail("'" + key + "' must be a non-negative integer");
    return v.get<T>();
  }
}

}  // namespace detail

/// Parses and validates a config document. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
inline RunConfig parse_run_config(const json& doc) {
  using detail::config_fail;
  using detail::typed;
  if (!doc.is_object()) config_fail("config must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!detail::known_key(key)) config_fail("unknown config key '" + key + "'");

  RunConfig c;
  auto has = [&](const char* k) { return doc.contains(k) && !doc.at(k).is_null(); };
  if (has("tree_kind")) {
    const auto k = parse_tree_kind(typed<std::string>(doc, "tree_kind"));
    if (!k) config_fail("tree_kind must be hhcart or randcart");
    c.forest.tree_kind = *k;
  }
  if (has("transform")) {
    const auto t = parse_transform(typed<std::string>(doc, "transform"));
    if (!t) config_fail("transform must be one of eig, svd, fast_ica, proj");
    c.forest.transform = *t;
  }
  if (has("n_estimators")) c.forest.n_estimators = typed<std::size_t>(doc, "n_estimators");
  if (has("max_depth")) c.forest.max_depth = typed<std::size_t>(doc, "max_depth");
  if (has("max_samples")) c.forest.max_samples = typed<double>(doc, "max_samples");
  if (has("max_features")) c.forest.max_features = typed<double>(doc, "max_features");
  if (has("seed")) c.forest.seed = typed<std::uint64_t>(doc, "seed");
  c.split.seed = c.forest.seed;
  if (has("test_size")) c.split.test_size = typed<double>(doc, "test_size");
  if (has("n_train")) c.split.n_train = typed<std::size_t>(doc, "n_train");
  if (has("n_test")) c.split.n_test = typed<std::size_t>(doc, "n_test");
  if (has("standardize")) c.standardize = typed<bool>(doc, "standardize");
  if (has("has_header")) c.has_header = typed<bool>(doc, "has_header");
  if (has("box_mode")) {
    const auto m = typed<std::string>(doc, "box_mode");
    if (m == "none") c.box_mode = BoxMode::none;
    else if (m == "pixels") c.box_mode = BoxMode::pixels;
    else config_fail("box_mode must be none or pixels");
  }
  if (has("input")) c.input = typed<std::string>(doc, "input");
  if (has("input_kind")) {
    const auto k = typed<std::string>(doc, "input_kind");
    if (k == "csv") c.input_kind = InputKind::csv;
    else if (k == "image_dir") c.input_kind = InputKind::image_dir;
    else config_fail("input_kind must be csv or image_dir");
  }
  if (has("resize")) {
    const json& r = doc.at("resize");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_unsigned() || !r[1].is_number_unsigned() ||
        r[0].get<std::size_t>() == 0 || r[1].get<std::size_t>() == 0) {
      config_fail("resize must be [height, width] with positive integers");
    }
    c.resize = std::array<std::size_t, 2>{r[0].get<std::size_t>(), r[1].get<std::size_t>()};
  }
  if (has("model")) c.model = typed<std::string>(doc, "model");
  if (has("codes")) c.codes = typed<std::string>(doc, "codes");
  if (has("output")) c.output = typed<std::string>(doc, "output");
  if (has("workers")) c.workers = typed<std::size_t>(doc, "workers");

  c.forest.validate();
  if (!(c.split.test_size >= 0.0 && c.split.test_size < 1.0)) config_fail("test_size must be in [0, 1)");
  if (c.workers < 1) config_fail("workers must be >= 1");
  return c;
}

/// Reads the config file (if any), applies flag overrides of the same names
/// and validates the result.
inline RunConfig load_run_config(const std::optional<std::string>& path,
                                 const std::map<std::string, std::string>& overrides) {
  json doc = json::object();
  if (path) {
    std::string text;
    try {
      text = ofae::detail::read_file(*path);
    } catch (const Error& e) {
      detail::config_fail("cannot read config file " + *path);
    }
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      detail::config_fail("config " + *path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) detail::config_fail("config must be a JSON object");
  }
  for (const auto& [key, text] : overrides) {
    if (!detail::known_key(key) || key == "resize") detail::config_fail("no config key named '" + key + "'");
    doc[key] = detail::value_from_flag(key, text);
  }
  return parse_run_config(doc);
}

// ---------------------------------------------------------------------------
// Data and model sets

struct InputData {
  Dataset data;
  bool image = false;
};

inline InputData load_input(const RunConfig& c) {
  if (!c.input) detail::config_fail("no input given (config key 'input' or --input)");
  const fs::path path = *c.input;
  if (!fs::exists(path)) throw Error(ErrorKind::IoError, "input not found: " + path.string());
  const InputKind kind = c.input_kind.value_or(fs::is_directory(path) ? InputKind::image_dir : InputKind::csv);
  InputData in;
  if (kind == InputKind::image_dir) {
    if (c.standardize) detail::config_fail("standardize applies to tabular input only");
    in.data = read_image_dir(path);
    in.image = true;
    if (c.resize) in.data = resize_bilinear(in.data, (*c.resize)[0], (*c.resize)[1]);
  } else {
    if (c.box_mode == BoxMode::pixels) detail::config_fail("box_mode pixels requires image input");
    if (c.resize) detail::config_fail("resize requires image input");
    const bool header = c.has_header.value_or(csv_has_header(path));
    in.data = read_csv(path, header);
    if (in.data.n() == 0) throw Error(ErrorKind::EmptyData, "no rows in " + path.string());
  }
  return in;
}

/// The encoder/decoder pairs of one run: one model for tabular or grayscale
/// data, three (R, G, B) for color images.
struct ModelSet {
  std::vector<ForestModel> models;

  bool image() const { return models.front().image_shape.has_value(); }
  ImageShape shape() const { return *models.front().image_shape; }
  std::size_t channels() const { return models.size(); }
  std::size_t n_estimators() const { return models.front().trees.size(); }
  std::size_t sample_size() const { return models.front().p * models.size(); }
};

inline fs::path channel_path(const fs::path& base, ChannelTag tag) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + "." + std::string(to_string(tag)) + base.extension().string());
  return p;
}

inline void save_models(const ModelSet& set, const fs::path& base) {
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  if (set.models.size() == 1) {
    save_model(base, set.models.front());
    return;
  }
  for (const auto& m : set.models) save_model(channel_path(base, *m.channel_tag), m);
}

inline ModelSet load_models(const fs::path& base) {
  ModelSet set;
  if (fs::exists(base)) {
    set.models.push_back(load_model(base));
  } else if (fs::exists(channel_path(base, ChannelTag::R))) {
    for (ChannelTag t : {ChannelTag::R, ChannelTag::G, ChannelTag::B}) {
      ForestModel m = load_model(channel_path(base, t));
      if (m.channel_tag != t) throw Error(ErrorKind::SchemaError, channel_path(base, t).string() + " has the wrong channel tag");
      set.models.push_back(std::move(m));
    }
  } else {
    throw Error(ErrorKind::IoError, "model not found: " + base.string());
  }
  const ForestModel& first = set.models.front();
  for (const auto& m : set.models) {
    if (m.p != first.p || m.image_shape != first.image_shape || m.trees.size() != first.trees.size()) {
      throw Error(ErrorKind::SchemaError, "channel models disagree in shape");
    }
  }
  if (first.image_shape && (*first.image_shape)[2] != set.models.size()) {
    throw Error(ErrorKind::SchemaError, "image model channel count differs from the number of model files");
  }
  return set;
}

inline void check_compatible(const ModelSet& set, const InputData& in) {
  if (set.image() != in.image) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string("model expects ") + (set.image() ? "image" : "tabular") + " input");
  }
  if (set.image() && set.shape() != *in.data.image_shape) {
    const auto s = set.shape();
    const auto d = *in.data.image_shape;
    throw Error(ErrorKind::DimensionMismatch, "model image shape " + std::to_string(s[0]) + "x" + std::to_string(s[1]) +
                                                  "x" + std::to_string(s[2]) + ", data " + std::to_string(d[0]) + "x" +
                                                  std::to_string(d[1]) + "x" + std::to_string(d[2]));
  }
  if (set.sample_size() != in.data.p()) {
    throw Error(ErrorKind::DimensionMismatch, "model expects " + std::to_string(set.sample_size()) +
                                                  " features, data has " + std::to_string(in.data.p()));
  }
}

inline ModelSet fit_models(const Dataset& train, bool image, const RunConfig& c) {
  const FitOptions opts{c.workers};
  ModelSet set;
  if (image) {
    set.models = fit_image_models(train.x, *train.image_shape, c.forest, opts);
  } else {
    set.models.push_back(fit_tabular(train.x, c.forest, c.standardize, opts));
  }
  return set;
}

/// One code per channel.
inline std::vector<LeafCode> encode_sample(const ModelSet& set, std::span<const double> sample) {
  if (set.image()) return encode_image(set.models, sample, set.channels());
  return {encode_raw(set.models.front(), sample)};
}

inline BoxMode effective_box(const ModelSet& set, const RunConfig* c) {
  if (c && c->box_mode) return *c->box_mode;
  return set.image() ? BoxMode::pixels : BoxMode::none;
}

/// Reconstruction in original units; images are rounded and clamped.
inline Vector reconstruct(const ModelSet& set, std::span<const LeafCode> codes, BoxMode box) {
  if (codes.size() != set.channels()) throw Error(ErrorKind::ChannelMismatch, "one code per channel expected");
  if (!set.image()) {
    const ForestModel& m = set.models.front();
    return decode(m, codes[0], box == BoxMode::pixels ? BoxSpec::pixels(m.p) : BoxSpec{});
  }
  const std::size_t channels = set.channels();
  const std::size_t hw = set.models.front().p;
  Vector pixels(hw * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const Vector plane = decode(set.models[c], codes[c], box == BoxMode::pixels ? BoxSpec::pixels(hw) : BoxSpec{});
    for (std::size_t k = 0; k < hw; ++k) pixels[k * channels + c] = quantize_pixel(plane[k]);
  }
  return pixels;
}

inline void validate_codes(const ModelSet& set, const std::vector<std::vector<LeafCode>>& per_channel) {
  for (std::size_t c = 0; c < per_channel.size(); ++c) {
    const ForestModel& m = set.models[c];
    for (std::size_t r = 0; r < per_channel[c].size(); ++r) {
      const LeafCode& code = per_channel[c][r];
      if (code.leaves.size() != m.trees.size()) {
        throw Error(ErrorKind::DimensionMismatch, "code row " + std::to_string(r) + " has " +
                                                      std::to_string(code.leaves.size()) + " columns, model has " +
                                                      std::to_string(m.trees.size()) + " trees");
      }
      for (std::size_t t = 0; t < code.leaves.size(); ++t) {
        if (code.leaves[t] >= m.trees[t].leaf_count()) {
          throw Error(ErrorKind::UnknownLeaf, "code row " + std::to_string(r) + ", tree " + std::to_string(t) +
                                                  ": leaf " + std::to_string(code.leaves[t]) + " does not exist");
        }
      }
    }
  }
}

inline std::string seconds_string(double s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << s;
  return os.str();
}

inline std::string image_file_name(std::size_t index, std::size_t channels) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu.%s", index, channels == 1 ? "pgm" : "ppm");
  return buf;
}

/// Decodes every code set; failures are reported on `err` and left empty.
struct DecodeBatch {
  std::vector<std::optional<Vector>> samples;
  std::vector<double> seconds;
  std::size_t failures = 0;
  double total_seconds = 0.0;
};

inline DecodeBatch decode_batch(const ModelSet& set, const std::vector<std::vector<LeafCode>>& codes, BoxMode box,
                                std::size_t workers, const std::vector<std::size_t>& labels, std::ostream& err) {
  DecodeBatch out;
  const std::size_t n = codes.size();
  out.samples.resize(n);
  out.seconds.assign(n, 0.0);
  std::vector<std::string> errors(n);
  const Stopwatch total;
  parallel_for(n, workers, [&](std::size_t i) {
    const Stopwatch sw;
    try {
      out.samples[i] = reconstruct(set, codes[i], box);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InfeasibleCode && e.kind() != ErrorKind::IterationLimit) throw;
      errors[i] = e.what();
    }
    out.seconds[i] = sw.seconds();
  });
  out.total_seconds = total.seconds();
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.samples[i]) {
      ++out.failures;
      err << "sample " << labels[i] << ": decode failed: " << errors[i] << "\n";
    }
  }
  return out;
}

}  // namespace ofae::app

namespace ofae::app {

/// Flag values shared by all subcommands. Overrides holds flags named after
/// config keys (--seed, --n_estimators, ...).
struct Invocation {
  std::optional<std::string> config;
  std::map<std::string, std::string> overrides;
  std::optional<std::string> model;
  std::optional<std::string> codes;
  std::optional<std::string> output;
  std::optional<std::string> metrics;
  std::optional<std::string> param;
  std::optional<std::string> values;
  std::optional<std::size_t> runs;
};

namespace detail {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
}

inline std::string require(const std::optional<std::string>& flag, const std::optional<std::string>& from_config,
                           const char* name) {
  if (flag) return *flag;
  if (from_config) return *from_config;
  config_fail(std::string("missing --") + name);
}

inline std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

struct MetricChoice {
  bool mse = true;
  bool ssim = false;
};

inline MetricChoice parse_metrics(const std::optional<std::string>& text, bool image) {
  MetricChoice m{true, image};
  if (!text) return m;
  m = {false, false};
  std::stringstream ss(*text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "mse") m.mse = true;
    else if (tok == "ssim") m.ssim = true;
    else config_fail("unknown metric '" + tok + "' (mse, ssim)");
  }
  if (m.ssim && !image) config_fail("ssim needs image input");
  // mse is always reported: the report schema requires the column
  m.mse = true;
  return m;
}

struct EvalResult {
  std::vector<std::size_t> index;
  std::vector<double> mse;
  std::vector<double> ssim;
  std::vector<double> seconds;
  std::size_t failures = 0;
  double decode_seconds = 0.0;
  double mse_mean = 0.0;
  double ssim_mean = 0.0;
};

/// Encodes and decodes every row of `x`, scoring reconstructions against the
/// originals. Failed rows score NaN and are excluded from the means.
inline EvalResult evaluate(const ModelSet& set, const Matrix& x, const std::vector<std::size_t>& labels,
                           BoxMode box, bool want_ssim, std::size_t workers, std::ostream& err) {
  std::vector<std::vector<LeafCode>> codes(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) codes[r] = encode_sample(set, x.row(r));
  const DecodeBatch batch = decode_batch(set, codes, box, workers, labels, err);
  EvalResult res;
  res.index = labels;
  res.seconds = batch.seconds;
  res.failures = batch.failures;
  res.decode_seconds = batch.total_seconds;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t ok = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (!batch.samples[r]) {
      res.mse.push_back(nan);
      res.ssim.push_back(nan);
      continue;
    }
    const Vector& rec = *batch.samples[r];
    res.mse.push_back(ofae::mse(x.row(r), rec));
    if (want_ssim) {
      const auto s = set.shape();
      res.ssim.push_back(ofae::ssim(x.row(r), rec, s[0], s[1], s[2]));
    } else {
      res.ssim.push_back(nan);
    }
    res.mse_mean += res.mse.back();
    if (want_ssim) res.ssim_mean += res.ssim.back();
    ++ok;
  }
  if (ok > 0) {
    res.mse_mean /= static_cast<double>(ok);
    res.ssim_mean /= static_cast<double>(ok);
  } else {
    res.mse_mean = res.ssim_mean = nan;
  }
  return res;
}

inline std::string num(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace detail

inline int cmd_fit(const Invocation& inv, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig c = load_run_config(inv.config, inv.overrides);
    const std::string model_path = detail::require(inv.model, c.model, "model");
    const InputData in = load_input(c);
    const Split split = train_test_split(in.data, c.split);
    const Stopwatch sw;
    const ModelSet set = fit_models(split.train, in.image, c);
    const double seconds = sw.seconds();
    save_models(set, model_path);
    out << "fit_seconds=" << seconds_string(seconds) << " n_train=" << split.train.n()
        << " n_estimators=" << c.forest.n_estimators << "\n";
    return int{kOk};
  });
}

inline int cmd_encode(const Invocation& inv, std::ostream& out, std::ostream& err) {
  (void)out;
  return detail::guarded(err, [&] {
    const RunConfig c = load_run_config(inv.config, inv.overrides);
    const std::string model_path = detail::require(inv.model, c.model, "model");
    const std::string codes_path = detail::require(inv.output ? inv.output : inv.codes, c.codes, "codes");
    const ModelSet set = load_models(model_path);
    const InputData in = load_input(c);
    check_compatible(set, in);
    std::vector<std::vector<LeafCode>> per_channel(set.channels());
    for (std::size_t r = 0; r < in.data.n(); ++r) {
      auto codes = encode_sample(set, in.data.x.row(r));
      for (std::size_t ch = 0; ch < codes.size(); ++ch) per_channel[ch].push_back(std::move(codes[ch]));
    }
    const fs::path base = codes_path;
    if (base.has_parent_path()) fs::create_directories(base.parent_path());
    if (set.channels() == 1) {
      write_codes(base, per_channel[0]);
    } else {
      for (std::size_t ch = 0; ch < set.channels(); ++ch)
        write_codes(channel_path(base, *set.models[ch].channel_tag), per_channel[ch]);
    }
    return int{kOk};
  });
}

inline int cmd_decode(const Invocation& inv, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig c = load_run_config(inv.config, inv.overrides);
    const std::string model_path = detail::require(inv.model, c.model, "model");
    const std::string codes_path = detail::require(inv.codes, c.codes, "codes");
    const std::string output = detail::require(inv.output, c.output, "output");
    const ModelSet set = load_models(model_path);

    std::vector<std::vector<LeafCode>> per_channel;
    if (set.channels() == 1) {
      per_channel.push_back(read_codes(codes_path));
    } else {
      for (const auto& m : set.models) per_channel.push_back(read_codes(channel_path(codes_path, *m.channel_tag)));
      for (const auto& ch : per_channel)
        if (ch.size() != per_channel.front().size()) {
          throw Error(ErrorKind::ChannelMismatch, "channel code files differ in row count");
        }
    }
    validate_codes(set, per_channel);
    const std::size_t n = per_channel.front().size();
    std::vector<std::vector<LeafCode>> codes(n);
    for (std::size_t r = 0; r < n; ++r)
      for (const auto& ch : per_channel) codes[r].push_back(ch[r]);

    const DecodeBatch batch = decode_batch(set, codes, effective_box(set, &c), c.workers, detail::iota_n(n), err);
    const fs::path target = output;
    if (set.image()) {
      fs::create_directories(target);
      for (std::size_t r = 0; r < n; ++r)
        if (batch.samples[r]) write_image(target / image_file_name(r, set.channels()), *batch.samples[r], set.shape());
    } else {
      if (target.has_parent_path()) fs::create_directories(target.parent_path());
      const std::size_t p = set.models.front().p;
      Matrix x(n, p);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < p; ++j)
          x(r, j) = batch.samples[r] ? (*batch.samples[r])[j] : std::numeric_limits<double>::quiet_NaN();
      write_csv(target, x);
    }
    out << "decode_seconds=" << seconds_string(batch.total_seconds) << "\n";
    return batch.failures ? int{kPartialDecode} : int{kOk};
  });
}

inline int cmd_roundtrip(const Invocation& inv, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig c = load_run_config(inv.config, inv.overrides);
    const std::string report = detail::require(inv.output, c.output, "output");
    const InputData in = load_input(c);
    const auto metrics = detail::parse_metrics(inv.metrics, in.image);

    ModelSet set;
    Matrix eval_x;
    std::vector<std::size_t> labels;
    const auto model_path = inv.model ? inv.model : std::optional<std::string>{};
    if (model_path) {
      set = load_models(*model_path);
      check_compatible(set, in);
      eval_x = in.data.x;
      labels = detail::iota_n(in.data.n());
    } else {
      const Split split = train_test_split(in.data, c.split);
      if (split.test.n() == 0) detail::config_fail("the split leaves no test samples to evaluate");
      const Stopwatch sw;
      set = fit_models(split.train, in.image, c);
      out << "fit_seconds=" << seconds_string(sw.seconds()) << " n_train=" << split.train.n()
          << " n_estimators=" << c.forest.n_estimators << "\n";
      eval_x = split.test.x;
      labels = split.test_index;
    }

    const auto res = detail::evaluate(set, eval_x, labels, effective_box(set, &c), metrics.ssim, c.workers, err);
    std::string csv = metrics.ssim ? "sample_index,mse,ssim,decode_seconds\n" : "sample_index,mse,decode_seconds\n";
    double mean_seconds = 0.0;
    for (std::size_t i = 0; i < res.index.size(); ++i) {
      csv += std::to_string(res.index[i]) + "," + detail::num(res.mse[i]);
      if (metrics.ssim) csv += "," + detail::num(res.ssim[i]);
      csv += "," + detail::num(res.seconds[i]) + "\n";
      mean_seconds += res.seconds[i];
    }
    mean_seconds /= static_cast<double>(std::max<std::size_t>(1, res.index.size()));
    csv += "mean," + detail::num(res.mse_mean);
    if (metrics.ssim) csv += "," + detail::num(res.ssim_mean);
    csv += "," + detail::num(mean_seconds) + "\n";
    const fs::path target = report;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    ofae::detail::write_file(target, csv);
    out << "decode_seconds=" << seconds_string(res.decode_seconds) << "\n";
    return res.failures ? int{kPartialDecode} : int{kOk};
  });
}

inline const std::vector<std::string>& ablation_params() {
  static const std::vector<std::string> p{"n_estimators", "max_depth", "max_features", "max_samples", "n_train"};
  return p;
}

inline int cmd_ablate(const Invocation& inv, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig base = load_run_config(inv.config, inv.overrides);
    if (!inv.param) detail::config_fail("missing --param");
    const std::string param = *inv.param;
    if (std::find(ablation_params().begin(), ablation_params().end(), param) == ablation_params().end()) {
      detail::config_fail("unknown ablation param '" + param +
                          "' (n_estimators, max_depth, max_features, max_samples, n_train)");
    }
    if (!inv.values || inv.values->empty()) detail::config_fail("missing --values");
    const std::size_t runs = inv.runs.value_or(1);
    if (runs < 1) detail::config_fail("--runs must be >= 1");
    std::vector<std::string> values;
    {
      std::stringstream ss(*inv.values);
      std::string tok;
      while (std::getline(ss, tok, ',')) values.push_back(std::string(ofae::detail::trim(tok)));
    }
    const std::string report = detail::require(inv.output, base.output, "output");

    // validate every value up front so a typo fails before any fitting
    std::vector<json> parsed;
    for (const auto& v : values) {
      json doc = json::object();
      doc[param] = detail::value_from_flag(param, v);
      parsed.push_back(doc[param]);
    }
    for (const auto& v : parsed) {
      RunConfig probe = base;
      if (param == "n_estimators") probe.forest.n_estimators = v.get<std::size_t>();
      if (param == "max_depth") probe.forest.max_depth = v.get<std::size_t>();
      if (param == "max_features") probe.forest.max_features = v.get<double>();
      if (param == "max_samples") probe.forest.max_samples = v.get<double>();
      probe.forest.validate();
    }

    const InputData in = load_input(base);
    const auto metrics = detail::parse_metrics(inv.metrics, in.image);
    std::string csv = "param,value,run,seed,mse_mean";
    if (metrics.ssim) csv += ",ssim_mean";
    csv += ",fit_seconds,decode_seconds\n";
    std::size_t failures = 0;
    for (std::size_t vi = 0; vi < parsed.size(); ++vi) {
      for (std::size_t run = 0; run < runs; ++run) {
        RunConfig c = base;
        const json& v = parsed[vi];
        if (param == "n_estimators") c.forest.n_estimators = v.get<std::size_t>();
        if (param == "max_depth") c.forest.max_depth = v.get<std::size_t>();
        if (param == "max_features") c.forest.max_features = v.get<double>();
        if (param == "max_samples") c.forest.max_samples = v.get<double>();
        if (param == "n_train") c.split.n_train = v.get<std::size_t>();
        c.forest.seed = base.forest.seed + run;
        c.split.seed = c.forest.seed;

        const Split split = train_test_split(in.data, c.split);
        if (split.test.n() == 0) detail::config_fail("the split leaves no test samples to evaluate");
        const Stopwatch sw;
        const ModelSet set = fit_models(split.train, in.image, c);
        const double fit_seconds = sw.seconds();
        const auto res =
            detail::evaluate(set, split.test.x, split.test_index, effective_box(set, &c), metrics.ssim, c.workers, err);
        failures += res.failures;

        const std::string value_text = v.is_number_unsigned() ? std::to_string(v.get<std::size_t>())
                                                              : format_double(v.get<double>());
        csv += param + "," + value_text + "," + std::to_string(run) + "," + std::to_string(c.forest.seed) + "," +
               detail::num(res.mse_mean);
        if (metrics.ssim) csv += "," + detail::num(res.ssim_mean);
        csv += "," + detail::num(fit_seconds) + "," + detail::num(res.decode_seconds) + "\n";
      }
    }
    const fs::path target = report;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    ofae::detail::write_file(target, csv);
    out << "rows=" << parsed.size() * runs << "\n";
    return failures ? int{kPartialDecode} : int{kOk};
  });
}

}  // namespace ofae::app
