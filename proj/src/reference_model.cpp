#include <cmath>
#include <random>

#include "qgc/attention.hpp"
#include "qgc/error.hpp"

namespace qgc {

namespace {

constexpr std::size_t kChunk = 4;

// Uniform in [-scale, scale) from the top 53 bits; independent of the
// standard library's distribution implementations.
double draw(std::mt19937_64& gen, double scale) {
  const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return (2.0 * unit - 1.0) * scale;
}

}  // namespace

void ReferenceModelConfig::validate() const {
  if (vocab_size == 0 || embed_dim == 0 || head_count == 0) {
    throw Error(ErrorKind::Config, "reference model sizes must be positive");
  }
  if (embed_dim % head_count != 0) {
    throw Error(ErrorKind::Config, "embed_dim " + std::to_string(embed_dim) +
                                       " is not divisible by head_count " +
                                       std::to_string(head_count));
  }
}

std::vector<Token> ref_tokenize(std::string_view text) {
  std::vector<Token> tokens;
  auto emit = [&](std::size_t start, std::size_t end) {
    tokens.push_back({tokens.size(), start, end, std::string(text.substr(start, end - start))});
  };
  for (const Word& w : segment_words(text)) {
    std::size_t chunk_start = w.char_start;
    std::size_t pos = w.char_start;
    std::size_t count = 0;
    while (pos < w.char_end) {
      utf8::decode(text, pos);
      if (++count == kChunk) {
        emit(chunk_start, pos);
        chunk_start = pos;
        count = 0;
      }
    }
    if (chunk_start < w.char_end) emit(chunk_start, w.char_end);
  }
  return tokens;
}

std::uint32_t ref_token_id(std::string_view surface, std::size_t vocab_size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : surface) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::uint32_t>(h % vocab_size);
}

ReferenceModel::ReferenceModel(ReferenceModelConfig config) : config_(config) {
  config_.validate();
  head_dim_ = config_.embed_dim / config_.head_count;
  const std::size_t d = config_.embed_dim;

  std::mt19937_64 gen(config_.seed);
  embeddings_.resize(config_.vocab_size * d);
  for (double& v : embeddings_) v = draw(gen, 1.0);

  // Scaled so projected components have roughly unit variance.
  const double proj_scale = std::sqrt(3.0 / static_cast<double>(d));
  w_query_.resize(config_.head_count * head_dim_ * d);
  w_key_.resize(w_query_.size());
  for (double& v : w_query_) v = draw(gen, proj_scale);
  for (double& v : w_key_) v = draw(gen, proj_scale);
}

std::vector<double> ReferenceModel::input_vector(std::uint32_t id, std::size_t position) const {
  const std::size_t d = config_.embed_dim;
  std::vector<double> x(embeddings_.begin() + static_cast<std::ptrdiff_t>(id % config_.vocab_size * d),
                        embeddings_.begin() + static_cast<std::ptrdiff_t>((id % config_.vocab_size + 1) * d));
  for (std::size_t k = 0; k < d; ++k) {
    const double freq = std::pow(10000.0, -static_cast<double>(k - k % 2) / static_cast<double>(d));
    const double angle = static_cast<double>(position) * freq;
    x[k] += (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
  }
  return x;
}

std::vector<double> ReferenceModel::attention_row(std::span<const std::uint32_t> ids,
                                                  std::size_t position) const {
  const std::size_t n = ids.size();
  if (position >= n) {
    throw Error(ErrorKind::Config, "attention position " + std::to_string(position) +
                                       " out of range for " + std::to_string(n) + " tokens");
  }
  const std::size_t d = config_.embed_dim;
  const std::size_t heads = config_.head_count;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(head_dim_));

  auto project = [&](const std::vector<double>& w, std::size_t h, const std::vector<double>& x) {
    std::vector<double> out(head_dim_, 0.0);
    for (std::size_t r = 0; r < head_dim_; ++r) {
      const double* row = &w[(h * head_dim_ + r) * d];
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += row[k] * x[k];
      out[r] = acc;
    }
    return out;
  };

  std::vector<std::vector<double>> inputs;
  inputs.reserve(position + 1);
  for (std::size_t i = 0; i <= position; ++i) inputs.push_back(input_vector(ids[i], i));

  std::vector<double> row(n, 0.0);
  std::vector<double> logits(position + 1);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto q = project(w_query_, h, inputs[position]);
    double max_logit = -INFINITY;
    for (std::size_t i = 0; i <= position; ++i) {
      const auto k = project(w_key_, h, inputs[i]);
      double dot = 0.0;
      for (std::size_t r = 0; r < head_dim_; ++r) dot += q[r] * k[r];
      logits[i] = dot * inv_sqrt_dh;
      max_logit = std::max(max_logit, logits[i]);
    }
    double denom = 0.0;
    for (std::size_t i = 0; i <= position; ++i) {
      logits[i] = std::exp(logits[i] - max_logit);
      denom += logits[i];
    }
    for (std::size_t i = 0; i <= position; ++i) row[i] += logits[i] / denom;
  }
  for (std::size_t i = 0; i <= position; ++i) row[i] /= static_cast<double>(heads);
  return row;
}

std::vector<double> ReferenceModel::trigger_attention(std::span<const std::uint32_t> ids) const {
  if (ids.empty()) throw Error(ErrorKind::Config, "reference model needs at least one token");
  return attention_row(ids, ids.size() - 1);
}

}  // namespace qgc
