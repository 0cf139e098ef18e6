#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pcr {

struct Article;
struct Query;

class EncoderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Embedding = std::vector<double>;

struct EncoderConfig {
  std::size_t hash_buckets = std::size_t{1} << 18;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t out_dim = 64;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Dense row-major float32 matrix. Bias vectors are stored as n x 1.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Learnable tensors, in checkpoint order.
enum class ParamId : std::size_t { kE = 0, kW1, kB1, kW2, kB2 };
inline constexpr std::size_t kParamCount = 5;
inline constexpr std::array<ParamId, kParamCount> kAllParams{ParamId::kE, ParamId::kW1, ParamId::kB1,
                                                             ParamId::kW2, ParamId::kB2};
std::string_view param_name(ParamId id);

// E: token-bucket embeddings (H x d_e); W1, b1: first head layer (d_h x d_e,
// d_h); W2, b2: output layer (d x d_h, d). The default frozen mask fine-tunes
// only the two head layers.
struct EncoderParams {
  EncoderConfig config;
  std::array<Matrix, kParamCount> tensors;
  std::array<bool, kParamCount> frozen{true, false, false, false, false};

  // E, W1, W2 ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
  static EncoderParams initialize(const EncoderConfig& config);

  Matrix& get(ParamId id) { return tensors[static_cast<std::size_t>(id)]; }
  const Matrix& get(ParamId id) const { return tensors[static_cast<std::size_t>(id)]; }
  bool is_frozen(ParamId id) const { return frozen[static_cast<std::size_t>(id)]; }
  void set_frozen(ParamId id, bool value) { frozen[static_cast<std::size_t>(id)] = value; }

  // Shapes match config and every entry is finite; throws EncoderError.
  void validate() const;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Token bucket multiset: (bucket, count) pairs sorted by bucket.
struct TokenBag {
  std::vector<std::pair<std::size_t, std::uint32_t>> buckets;
  std::size_t token_count = 0;
};

std::size_t bucket_of(std::string_view token, std::size_t hash_buckets);
TokenBag bag_of_tokens(std::string_view text, std::size_t hash_buckets);

// Intermediate values of one forward pass, kept for backpropagation.
struct Activations {
  std::vector<double> pooled;  // d_e, mean of E rows
  std::vector<double> hidden;  // d_h, tanh(W1 pooled + b1)
  Embedding output;            // d,   W2 hidden + b2
};

std::vector<double> pool_tokens(const EncoderParams& params, const TokenBag& bag);
Activations forward_head(const EncoderParams& params, std::vector<double> pooled);

// text -> embedding. Throws EncoderError if a participating parameter is not
// finite.
Embedding encode(const EncoderParams& params, std::string_view text);
Embedding encode_query(const EncoderParams& params, const Query& query);
Embedding encode_article(const EncoderParams& params, const Article& article);

// Float64 gradient buffer with the shape of one parameter tensor.
struct GradBuffer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  GradBuffer() = default;
  GradBuffer(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

// Gradient buffers mirroring EncoderParams; frozen tensors stay empty.
struct EncoderGrads {
  std::array<GradBuffer, kParamCount> tensors;

  static EncoderGrads zeros_like(const EncoderParams& params);
  GradBuffer& get(ParamId id) { return tensors[static_cast<std::size_t>(id)]; }
  const GradBuffer& get(ParamId id) const { return tensors[static_cast<std::size_t>(id)]; }
  void scale(double factor);
};

// Accumulates d(loss)/d(params) given d(loss)/d(output) for one forward pass.
void backward(const EncoderParams& params, const Activations& act, const TokenBag& bag,
              std::span<const double> grad_output, EncoderGrads& grads);

// Checkpoint: one JSON header line (format version, config, frozen flags),
// then for each of E, W1, b1, W2, b2: rows and cols as little-endian uint64
// followed by rows*cols little-endian float32 values, row-major.
inline constexpr int kCheckpointVersion = 1;
void save_checkpoint(const EncoderParams& params, std::ostream& out);
void save_checkpoint(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_checkpoint(std::istream& in);
EncoderParams load_checkpoint(const std::filesystem::path& path);

// FNV-1a over the serialized checkpoint, hex encoded.
std::string model_version(const EncoderParams& params);

}  // namespace pcr
