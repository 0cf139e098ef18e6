#include "pcr/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "pcr/corpus.hpp"
#include "pcr/random.hpp"
#include "pcr/text.hpp"

namespace pcr {
namespace {

constexpr std::string_view kCheckpointFormat = "pcr-encoder";

std::pair<std::size_t, std::size_t> expected_shape(const EncoderConfig& c, ParamId id) {
  switch (id) {
    case ParamId::kE: return {c.hash_buckets, c.embed_dim};
    case ParamId::kW1: return {c.hidden_dim, c.embed_dim};
    case ParamId::kB1: return {c.hidden_dim, 1};
    case ParamId::kW2: return {c.out_dim, c.hidden_dim};
    case ParamId::kB2: return {c.out_dim, 1};
  }
  throw std::logic_error("bad param id");
}

void fill_uniform(Matrix& m, double bound, Rng rng) {
  for (float& v : m.data) v = static_cast<float>(rng.uniform(-bound, bound));
}

void require_finite(std::span<const float> values, ParamId id) {
  for (const float v : values) {
    if (!std::isfinite(v)) {
      throw EncoderError("non-finite entry in parameter " + std::string(param_name(id)));
    }
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (hash_buckets < 2) throw EncoderError("hash_buckets must be at least 2");
  if (embed_dim < 1 || hidden_dim < 1 || out_dim < 1) {
    throw EncoderError("encoder dimensions must be at least 1");
  }
}

std::string_view param_name(ParamId id) {
  switch (id) {
    case ParamId::kE: return "E";
    case ParamId::kW1: return "W1";
    case ParamId::kB1: return "b1";
    case ParamId::kW2: return "W2";
    case ParamId::kB2: return "b2";
  }
  return "?";
}

EncoderParams EncoderParams::initialize(const EncoderConfig& config) {
  config.validate();
  EncoderParams params;
  params.config = config;
  for (const auto id : kAllParams) {
    const auto [rows, cols] = expected_shape(config, id);
    params.get(id) = Matrix(rows, cols);
  }
  const Rng root(config.seed);
  // A lookup row has a single active input, so E uses fan_in = 1.
  fill_uniform(params.get(ParamId::kE), 1.0, root.split("E"));
  fill_uniform(params.get(ParamId::kW1), 1.0 / std::sqrt(static_cast<double>(config.embed_dim)),
               root.split("W1"));
  fill_uniform(params.get(ParamId::kW2), 1.0 / std::sqrt(static_cast<double>(config.hidden_dim)),
               root.split("W2"));
  return params;
}

void EncoderParams::validate() const {
  config.validate();
  for (const auto id : kAllParams) {
    const auto& m = get(id);
    const auto [rows, cols] = expected_shape(config, id);
    if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols) {
      throw EncoderError("parameter " + std::string(param_name(id)) + " has shape " +
                         std::to_string(m.rows) + "x" + std::to_string(m.cols) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    require_finite(m.data, id);
  }
}

std::size_t bucket_of(std::string_view token, std::size_t hash_buckets) {
  return static_cast<std::size_t>(fnv1a64(token) % hash_buckets);
}

TokenBag bag_of_tokens(std::string_view text, std::size_t hash_buckets) {
  std::vector<std::size_t> ids;
  for (const auto& token : tokenize(text)) ids.push_back(bucket_of(token, hash_buckets));
  std::sort(ids.begin(), ids.end());
  TokenBag bag;
  bag.token_count = ids.size();
  for (const auto id : ids) {
    if (!bag.buckets.empty() && bag.buckets.back().first == id) {
      ++bag.buckets.back().second;
    } else {
      bag.buckets.emplace_back(id, 1u);
    }
  }
  return bag;
}

std::vector<double> pool_tokens(const EncoderParams& params, const TokenBag& bag) {
  const auto& table = params.get(ParamId::kE);
  std::vector<double> pooled(table.cols, 0.0);
  if (bag.token_count == 0) return pooled;
  for (const auto& [bucket, count] : bag.buckets) {
    const auto row = table.row(bucket);
    require_finite(row, ParamId::kE);
    for (std::size_t j = 0; j < row.size(); ++j) pooled[j] += static_cast<double>(count) * row[j];
  }
  const double inv = 1.0 / static_cast<double>(bag.token_count);
  for (double& v : pooled) v *= inv;
  return pooled;
}

Activations forward_head(const EncoderParams& params, std::vector<double> pooled) {
  const auto& w1 = params.get(ParamId::kW1);
  const auto& b1 = params.get(ParamId::kB1);
  const auto& w2 = params.get(ParamId::kW2);
  const auto& b2 = params.get(ParamId::kB2);
  require_finite(w1.data, ParamId::kW1);
  require_finite(b1.data, ParamId::kB1);
  require_finite(w2.data, ParamId::kW2);
  require_finite(b2.data, ParamId::kB2);

  Activations act;
  act.pooled = std::move(pooled);
  act.hidden.assign(w1.rows, 0.0);
  for (std::size_t i = 0; i < w1.rows; ++i) {
    const auto row = w1.row(i);
    double z = b1.data[i];
    for (std::size_t j = 0; j < row.size(); ++j) z += static_cast<double>(row[j]) * act.pooled[j];
    act.hidden[i] = std::tanh(z);
  }
  act.output.assign(w2.rows, 0.0);
  for (std::size_t i = 0; i < w2.rows; ++i) {
    const auto row = w2.row(i);
    double y = b2.data[i];
    for (std::size_t j = 0; j < row.size(); ++j) y += static_cast<double>(row[j]) * act.hidden[j];
    act.output[i] = y;
  }
  return act;
}

Embedding encode(const EncoderParams& params, std::string_view text) {
  const auto bag = bag_of_tokens(text, params.config.hash_buckets);
  return forward_head(params, pool_tokens(params, bag)).output;
}

Embedding encode_query(const EncoderParams& params, const Query& query) {
  const auto separator = query.text.find(kTopicSeparator);
  if (separator == std::string::npos) {
    throw EncoderError("query " + query.paragraph_id + " has no [TS] separator");
  }
  const auto topic = std::string_view(query.text).substr(separator + kTopicSeparator.size());
  if (tokenize(topic).empty()) {
    throw EncoderError("query " + query.paragraph_id + " has an empty topic sentence");
  }
  return encode(params, query.text);
}

Embedding encode_article(const EncoderParams& params, const Article& article) {
  return encode(params, compose_article_text(article.title, article.abstract));
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& params) {
  EncoderGrads grads;
  for (const auto id : kAllParams) {
    if (params.is_frozen(id)) continue;
    const auto& m = params.get(id);
    grads.get(id) = GradBuffer(m.rows, m.cols);
  }
  return grads;
}

void EncoderGrads::scale(double factor) {
  for (auto& m : tensors) {
    for (double& v : m.data) v *= factor;
  }
}

void backward(const EncoderParams& params, const Activations& act, const TokenBag& bag,
              std::span<const double> grad_output, EncoderGrads& grads) {
  const auto& w1 = params.get(ParamId::kW1);
  const auto& w2 = params.get(ParamId::kW2);
  const std::size_t d_out = w2.rows;
  const std::size_t d_hidden = w1.rows;
  const std::size_t d_embed = w1.cols;

  if (!params.is_frozen(ParamId::kB2)) {
    auto& g = grads.get(ParamId::kB2);
    for (std::size_t i = 0; i < d_out; ++i) g.data[i] += grad_output[i];
  }
  if (!params.is_frozen(ParamId::kW2)) {
    auto& g = grads.get(ParamId::kW2);
    for (std::size_t i = 0; i < d_out; ++i) {
      for (std::size_t j = 0; j < d_hidden; ++j) {
        g.at(i, j) += grad_output[i] * act.hidden[j];
      }
    }
  }

  const bool need_hidden_grad = !params.is_frozen(ParamId::kW1) ||
                                !params.is_frozen(ParamId::kB1) || !params.is_frozen(ParamId::kE);
  if (!need_hidden_grad) return;

  // d/dz of tanh(z) is 1 - tanh(z)^2.
  std::vector<double> grad_pre(d_hidden, 0.0);
  for (std::size_t j = 0; j < d_hidden; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d_out; ++i) acc += static_cast<double>(w2.at(i, j)) * grad_output[i];
    grad_pre[j] = acc * (1.0 - act.hidden[j] * act.hidden[j]);
  }
  if (!params.is_frozen(ParamId::kB1)) {
    auto& g = grads.get(ParamId::kB1);
    for (std::size_t j = 0; j < d_hidden; ++j) g.data[j] += grad_pre[j];
  }
  if (!params.is_frozen(ParamId::kW1)) {
    auto& g = grads.get(ParamId::kW1);
    for (std::size_t i = 0; i < d_hidden; ++i) {
      for (std::size_t j = 0; j < d_embed; ++j) {
        g.at(i, j) += grad_pre[i] * act.pooled[j];
      }
    }
  }
  if (!params.is_frozen(ParamId::kE) && bag.token_count > 0) {
    std::vector<double> grad_pooled(d_embed, 0.0);
    for (std::size_t i = 0; i < d_hidden; ++i) {
      const auto row = w1.row(i);
      for (std::size_t j = 0; j < d_embed; ++j) grad_pooled[j] += row[j] * grad_pre[i];
    }
    auto& g = grads.get(ParamId::kE);
    const double inv = 1.0 / static_cast<double>(bag.token_count);
    for (const auto& [bucket, count] : bag.buckets) {
      auto row = g.row(bucket);
      const double weight = static_cast<double>(count) * inv;
      for (std::size_t j = 0; j < d_embed; ++j) row[j] += weight * grad_pooled[j];
    }
  }
}

void save_checkpoint(const EncoderParams& params, std::ostream& out) {
  params.validate();
  nlohmann::ordered_json header;
  header["format"] = kCheckpointFormat;
  header["version"] = kCheckpointVersion;
  header["config"] = {{"hash_buckets", params.config.hash_buckets},
                      {"embed_dim", params.config.embed_dim},
                      {"hidden_dim", params.config.hidden_dim},
                      {"out_dim", params.config.out_dim},
                      {"seed", params.config.seed}};
  nlohmann::ordered_json frozen;
  for (const auto id : kAllParams) frozen[std::string(param_name(id))] = params.is_frozen(id);
  header["frozen"] = frozen;
  out << header.dump() << '\n';
  for (const auto id : kAllParams) {
    const auto& m = params.get(id);
    binary::write_u64(out, m.rows);
    binary::write_u64(out, m.cols);
    binary::write_floats(out, m.data);
  }
  if (!out) throw EncoderError("failed to write checkpoint");
}

void save_checkpoint(const EncoderParams& params, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EncoderError("cannot open " + path.string() + " for writing");
  save_checkpoint(params, out);
}

EncoderParams load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EncoderError("checkpoint is empty");
  EncoderParams params;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format") != kCheckpointFormat) throw EncoderError("not an encoder checkpoint");
    if (header.at("version").get<int>() != kCheckpointVersion) {
      throw EncoderError("unsupported checkpoint version " + header.at("version").dump());
    }
    const auto& config = header.at("config");
    params.config.hash_buckets = config.at("hash_buckets").get<std::size_t>();
    params.config.embed_dim = config.at("embed_dim").get<std::size_t>();
    params.config.hidden_dim = config.at("hidden_dim").get<std::size_t>();
    params.config.out_dim = config.at("out_dim").get<std::size_t>();
    params.config.seed = config.at("seed").get<std::uint64_t>();
    for (const auto id : kAllParams) {
      params.set_frozen(id, header.at("frozen").at(std::string(param_name(id))).get<bool>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw EncoderError(std::string("bad checkpoint header: ") + e.what());
  }
  params.config.validate();
  try {
    for (const auto id : kAllParams) {
      const auto rows = binary::read_u64(in, "matrix shape");
      const auto cols = binary::read_u64(in, "matrix shape");
      const auto [want_rows, want_cols] = expected_shape(params.config, id);
      if (rows != want_rows || cols != want_cols) {
        throw EncoderError("checkpoint matrix " + std::string(param_name(id)) +
                           " has an unexpected shape");
      }
      Matrix m(rows, cols);
      binary::read_floats(in, m.data, "matrix values");
      params.get(id) = std::move(m);
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const EncoderError*>(&e) != nullptr) throw;
    throw EncoderError(std::string("bad checkpoint: ") + e.what());
  }
  params.validate();
  return params;
}

EncoderParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EncoderError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

std::string model_version(const EncoderParams& params) {
  std::ostringstream out(std::ios::binary);
  save_checkpoint(params, out);
  return to_hex(fnv1a64(out.str()));
}

}  // namespace pcr
