#pragma once

// Encoder / decoder. A sample is encoded as the leaf it reaches in every
// tree; decoding regenerates each tree's signed path from the stored
// structure, stacks the inequalities sign * <w, x> >= sign * b tree by tree
// in path order, and returns the minimum-L1 point of that polyhedron.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ofae/error.hpp"
#include "ofae/forest.hpp"
#include "ofae/lpsolve.hpp"
#include "ofae/numkit.hpp"
#include "ofae/standardizer.hpp"

namespace ofae {

struct LeafCode {
  std::vector<std::size_t> leaves;

  friend bool operator==(const LeafCode&, const LeafCode&) = default;
};

struct RowProvenance {
  std::size_t tree = 0;
  std::size_t node_id = 0;
  int sign = 1;

  friend bool operator==(const RowProvenance&, const RowProvenance&) = default;
};

struct ConstraintSystem {
  Matrix a;  // (sum of path lengths) x p
  Vector b;
  std::vector<RowProvenance> provenance;

  std::size_t rows() const noexcept { return b.size(); }

  /// max_r (b_r - <a_r, x>), floored at 0.
  double max_violation(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t r = 0; r < b.size(); ++r) v = std::max(v, b[r] - dot(a.row(r), x));
    return v;
  }
};

/// x must already be in model space (standardized when the model has a
/// standardizer); see encode_raw.
inline LeafCode encode(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.p) {
    throw Error(ErrorKind::DimensionMismatch,
                "sample has " + std::to_string(x.size()) + " features, model expects " + std::to_string(model.p));
  }
  LeafCode code;
  code.leaves.reserve(model.trees.size());
  for (const auto& tree : model.trees) code.leaves.push_back(tree.apply(x).terminal_leaf);
  return code;
}

inline Vector to_model_space(const ForestModel& model, std::span<const double> raw) {
  if (raw.size() != model.p) throw Error(ErrorKind::DimensionMismatch, "sample dimension differs from model");
  return model.standardizer ? model.standardizer->transform(raw) : Vector(raw.begin(), raw.end());
}

inline LeafCode encode_raw(const ForestModel& model, std::span<const double> raw) {
  return encode(model, to_model_space(model, raw));
}

inline ConstraintSystem assemble(const ForestModel& model, const LeafCode& code) {
  if (code.leaves.size() != model.trees.size()) {
    throw Error(ErrorKind::DimensionMismatch, "code has " + std::to_string(code.leaves.size()) +
                                                  " entries, model has " + std::to_string(model.trees.size()) +
                                                  " trees");
  }
  std::size_t total = 0;
  for (std::size_t t = 0; t < model.trees.size(); ++t)
    total += model.trees[t].path_of_leaf(code.leaves[t]).steps.size();

  ConstraintSystem sys{Matrix(total, model.p), Vector(total), {}};
  sys.provenance.reserve(total);
  std::size_t r = 0;
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const ObliqueTree& tree = model.trees[t];
    for (const PathStep& step : tree.path_of_leaf(code.leaves[t]).steps) {
      const ObliqueNode& node = tree.nodes()[step.node_id];
      const double s = static_cast<double>(step.sign);
      for (const auto& [i, w] : node.weights) {
        if (i >= model.p) throw Error(ErrorKind::SchemaError, "weight index beyond model dimension");
        sys.a(r, i) = s * w;
      }
      sys.b[r] = s * node.threshold;
      sys.provenance.push_back({t, step.node_id, step.sign});
      ++r;
    }
  }
  return sys;
}

struct DecodeResult {
  Vector x;            // returned sample, original units
  Vector model_space;  // LP solution before inverse standardization
  double max_violation = 0.0;
  std::size_t rows = 0;
};

inline DecodeResult decode_detailed(const ForestModel& model, const LeafCode& code, const BoxSpec& box = {},
                                    const L1Options& options = {}) {
  const ConstraintSystem sys = assemble(model, code);
  BoxSpec lp_box = box;
  if (model.standardizer && !box.empty()) {
    // the box is given in original units; map it into model space
    const Standardizer& s = *model.standardizer;
    if (lp_box.lo) lp_box.lo = s.transform(*lp_box.lo);
    if (lp_box.hi) lp_box.hi = s.transform(*lp_box.hi);
  }
  L1Solution sol = solve_l1_detailed(sys.a, sys.b, lp_box, options);
  DecodeResult out;
  out.model_space = sol.x;
  out.max_violation = sys.max_violation(sol.x);
  out.rows = sys.rows();
  out.x = model.standardizer ? model.standardizer->inverse(sol.x) : std::move(sol.x);
  return out;
}

inline Vector decode(const ForestModel& model, const LeafCode& code, const BoxSpec& box = {}) {
  return decode_detailed(model, code, box).x;
}

// ---------------------------------------------------------------------------
// Fitting helpers

/// Fits one tabular model, optionally z-scoring features first.
inline ForestModel fit_tabular(const Matrix& x, const ForestConfig& config, bool standardize,
                               const FitOptions& options = {}) {
  if (!standardize) return fit(x, config, options);
  Standardizer s = Standardizer::fit(x);
  ForestModel model = fit(s.transform(x), config, options);
  model.standardizer = std::move(s);
  return model;
}

// ---------------------------------------------------------------------------
// Images: pixels are stored interleaved (row-major, channel fastest), one
// model per channel.

inline Matrix channel_plane(const Matrix& pixels, std::size_t channels, std::size_t c) {
  if (pixels.cols() % channels != 0) throw Error(ErrorKind::ChannelMismatch, "pixel count not divisible by channels");
  const std::size_t hw = pixels.cols() / channels;
  Matrix out(pixels.rows(), hw);
  for (std::size_t r = 0; r < pixels.rows(); ++r)
    for (std::size_t k = 0; k < hw; ++k) out(r, k) = pixels(r, k * channels + c);
  return out;
}

inline std::vector<ChannelTag> channel_tags(std::size_t channels) {
  if (channels == 1) return {ChannelTag::gray};
  if (channels == 3) return {ChannelTag::R, ChannelTag::G, ChannelTag::B};
  throw Error(ErrorKind::ChannelMismatch, "images must have 1 or 3 channels");
}

/// One model per channel; each channel model gets its own seed substream so
/// the three forests differ.
inline std::vector<ForestModel> fit_image_models(const Matrix& pixels, const ImageShape& shape,
                                                 const ForestConfig& config, const FitOptions& options = {}) {
  const auto tags = channel_tags(shape[2]);
  if (pixels.cols() != shape[0] * shape[1] * shape[2]) {
    throw Error(ErrorKind::ShapeMismatch, "pixel matrix width differs from image shape");
  }
  std::vector<ForestModel> models;
  for (std::size_t c = 0; c < tags.size(); ++c) {
    ForestConfig cc = config;
    if (tags.size() > 1) cc.seed = Rng(config.seed).substream(std::string(to_string(tags[c]))).next_u64();
    ForestModel m = fit(channel_plane(pixels, shape[2], c), cc, options);
    m.channel_tag = tags[c];
    m.image_shape = shape;
    models.push_back(std::move(m));
  }
  return models;
}

inline void check_channels(std::span<const ForestModel> models, std::size_t channels) {
  if (models.size() != channels || (channels != 1 && channels != 3)) {
    throw Error(ErrorKind::ChannelMismatch, std::to_string(models.size()) + " models for " +
                                                std::to_string(channels) + " channels");
  }
}

inline std::vector<LeafCode> encode_image(std::span<const ForestModel> models, std::span<const double> pixels,
                                          std::size_t channels) {
  check_channels(models, channels);
  if (pixels.size() % channels != 0) throw Error(ErrorKind::ChannelMismatch, "pixel count not divisible by channels");
  const std::size_t hw = pixels.size() / channels;
  std::vector<LeafCode> codes;
  Vector plane(hw);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < hw; ++k) plane[k] = pixels[k * channels + c];
    codes.push_back(encode_raw(models[c], plane));
  }
  return codes;
}

/// Rounds half-up and clamps to [0, 255].
inline double quantize_pixel(double v) { return std::clamp(std::floor(v + 0.5), 0.0, 255.0); }

inline Vector decode_image(std::span<const ForestModel> models, std::span<const LeafCode> codes) {
  const std::size_t channels = codes.size();
  check_channels(models, channels);
  const std::size_t hw = models[0].p;
  Vector pixels(hw * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    if (models[c].p != hw) throw Error(ErrorKind::ChannelMismatch, "channel models disagree on pixel count");
    const Vector plane = decode(models[c], codes[c], BoxSpec::pixels(hw));
    for (std::size_t k = 0; k < hw; ++k) pixels[k * channels + c] = quantize_pixel(plane[k]);
  }
  return pixels;
}

}  // namespace ofae
