// Copyright 2026 The Stance Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stance/model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "stance/errors.h"

namespace stance {
namespace {

Tensor Glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, double scale,
              std::mt19937_64& rng) {
  const double bound = scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return Tensor::Uniform(std::move(shape), bound, rng, /*requires_grad=*/true);
}

LstmParams InitLstm(const ModelConfig& c, std::mt19937_64& rng) {
  const std::size_t d = c.embed_dim, h = c.hidden_dim;
  LstmParams p;
  p.input_weights = Glorot({d, 4 * h}, d, 4 * h, c.init_scale, rng);
  p.recurrent_weights = Glorot({h, 4 * h}, h, 4 * h, c.init_scale, rng);
  std::vector<double> bias(4 * h, 0.0);
  std::fill(bias.begin() + h, bias.begin() + 2 * h, 1.0);
  p.bias = Tensor::FromValues({4 * h}, std::move(bias), true);
  return p;
}

LstmParams CloneLstm(const LstmParams& p) {
  return {p.input_weights.Clone(), p.recurrent_weights.Clone(), p.bias.Clone()};
}

// Little-endian binary writer/reader for checkpoints.
class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Str(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void Raw(std::string_view s) { out_.append(s); }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(std::string bytes, std::string source)
      : in_(std::move(bytes)), source_(std::move(source)) {}

  std::uint8_t U8() {
    Need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{U8()} << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{U8()} << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const std::uint32_t n = U32();
    return Raw(n);
  }
  std::string Raw(std::size_t n) {
    Need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == in_.size(); }
  const std::string& source() const { return source_; }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw TruncatedFileError(source_ + ": unexpected end of file at byte " +
                               std::to_string(pos_));
    }
  }

  std::string in_;
  std::size_t pos_ = 0;
  std::string source_;
};

constexpr std::string_view kMagic = "STANCEPM";
constexpr std::string_view kTrailer = "ENDCKPT\n";

}  // namespace

void ModelConfig::Validate() const {
  if (embed_dim == 0) throw std::invalid_argument("embedding size must be positive");
  if (hidden_dim == 0) throw std::invalid_argument("hidden size must be positive");
  if (vocab_size < 2) throw std::invalid_argument("vocabulary must hold PAD and UNK");
  if (!(init_scale > 0.0)) throw std::invalid_argument("init scale must be positive");
}

PhaseModel PhaseModel::Init(const ModelConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  const std::size_t d = config.embed_dim, h = config.hidden_dim;
  PhaseModel m;
  m.config = config;
  m.embeddings = Glorot({config.vocab_size, d}, config.vocab_size, d, config.init_scale, rng);
  m.forward_lstm = InitLstm(config, rng);
  m.backward_lstm = InitLstm(config, rng);
  m.attention_weights = Glorot({2 * d, 1}, 2 * d, 1, config.init_scale, rng);
  m.attention_bias = Tensor::Zeros({1}, true);
  m.classifier_weights = Glorot({2 * h, 2}, 2 * h, 2, config.init_scale, rng);
  m.classifier_bias = Tensor::Zeros({2}, true);
  return m;
}

std::vector<Tensor> PhaseModel::Parameters() const {
  return {embeddings,
          forward_lstm.input_weights,  forward_lstm.recurrent_weights,  forward_lstm.bias,
          backward_lstm.input_weights, backward_lstm.recurrent_weights, backward_lstm.bias,
          attention_weights,           attention_bias,
          classifier_weights,          classifier_bias};
}

std::vector<std::string> PhaseModel::ParameterNames() {
  return {"embeddings",
          "lstm_fwd.input",  "lstm_fwd.recurrent",  "lstm_fwd.bias",
          "lstm_bwd.input",  "lstm_bwd.recurrent",  "lstm_bwd.bias",
          "attention.weights", "attention.bias",
          "classifier.weights", "classifier.bias"};
}

std::vector<Shape> PhaseModel::ParameterShapes(const ModelConfig& c) {
  const std::size_t d = c.embed_dim, h = c.hidden_dim;
  return {{c.vocab_size, d},
          {d, 4 * h}, {h, 4 * h}, {4 * h},
          {d, 4 * h}, {h, 4 * h}, {4 * h},
          {2 * d, 1}, {1},
          {2 * h, 2}, {2}};
}

PhaseModel PhaseModel::Clone() const {
  PhaseModel m;
  m.config = config;
  m.embeddings = embeddings.Clone();
  m.forward_lstm = CloneLstm(forward_lstm);
  m.backward_lstm = CloneLstm(backward_lstm);
  m.attention_weights = attention_weights.Clone();
  m.attention_bias = attention_bias.Clone();
  m.classifier_weights = classifier_weights.Clone();
  m.classifier_bias = classifier_bias.Clone();
  return m;
}

// ---------------------------------------------------------------------------
// Forward pieces

Tensor TargetQuery(Tape& tape, const Tensor& embeddings,
                   std::span<const TokenId> target_ids) {
  if (target_ids.empty()) throw ContractError("target query needs at least one target word");
  // Summing in id order makes the mean bit-identical under any reordering.
  std::vector<TokenId> sorted(target_ids.begin(), target_ids.end());
  std::sort(sorted.begin(), sorted.end());
  return tape.MeanRows(tape.GatherRows(embeddings, sorted));
}

Tensor Augment(Tape& tape, const Tensor& word_embeds, const Tensor& query) {
  if (word_embeds.rank() != 2 || query.rank() != 1 || query.size() != word_embeds.cols()) {
    throw DimensionError("augment: word embeddings " + ShapeString(word_embeds.shape()) +
                         " do not fit query " + ShapeString(query.shape()));
  }
  const std::vector<std::size_t> repeat(word_embeds.rows(), 0);
  Tensor tiled = tape.GatherRows(tape.Reshape(query, {1, query.size()}), repeat);
  return tape.ConcatRows(word_embeds, tiled);
}

Tensor LstmEncode(Tape& tape, const Tensor& inputs, const LstmParams& params,
                  bool reverse) {
  if (inputs.rank() != 2) {
    throw DimensionError("lstm: inputs must be a matrix, got " + ShapeString(inputs.shape()));
  }
  const std::size_t m = inputs.rows();
  const std::size_t h = params.recurrent_weights.rows();
  // Input projections for every step at once.
  const Tensor projected =
      tape.AddRowBias(tape.MatMul(inputs, params.input_weights), params.bias);

  std::vector<Tensor> states(m);
  Tensor hidden, cell;
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t t = reverse ? m - 1 - step : step;
    Tensor gates = tape.Row(projected, t);
    if (step > 0) gates = tape.Add(gates, tape.MatMul(hidden, params.recurrent_weights));
    const Tensor in_gate = tape.Sigmoid(tape.SliceCols(gates, 0, h));
    const Tensor forget_gate = tape.Sigmoid(tape.SliceCols(gates, h, 2 * h));
    const Tensor candidate = tape.Tanh(tape.SliceCols(gates, 2 * h, 3 * h));
    const Tensor out_gate = tape.Sigmoid(tape.SliceCols(gates, 3 * h, 4 * h));
    // The zero initial state drops the forget term on the first step.
    cell = step == 0 ? tape.Mul(in_gate, candidate)
                     : tape.Add(tape.Mul(forget_gate, cell), tape.Mul(in_gate, candidate));
    hidden = tape.Mul(out_gate, tape.Tanh(cell));
    states[t] = hidden;
  }
  return tape.StackRows(states);
}

Tensor BiLstmEncode(Tape& tape, const Tensor& word_embeds, const LstmParams& forward,
                    const LstmParams& backward) {
  if (word_embeds.rank() != 2) {
    throw ContractError("bilstm: expected (m x d) inputs, got " +
                        ShapeString(word_embeds.shape()));
  }
  return tape.ConcatRows(LstmEncode(tape, word_embeds, forward, false),
                         LstmEncode(tape, word_embeds, backward, true));
}

Tensor AttentionWeights(Tape& tape, const Tensor& augmented, const Tensor& weights,
                        const Tensor& bias) {
  const Tensor scores = tape.AddRowBias(tape.MatMul(augmented, weights), bias);
  return tape.Softmax(tape.Reshape(scores, {augmented.rows()}));
}

Tensor Attend(Tape& tape, const Tensor& encoded, const Tensor& weights) {
  if (encoded.rank() != 2 || weights.size() != encoded.rows()) {
    throw DimensionError("attend: " + std::to_string(weights.size()) +
                         " weights for encoder output " + ShapeString(encoded.shape()));
  }
  const Tensor pooled = tape.MatMul(tape.Reshape(weights, {1, weights.size()}), encoded);
  return tape.Reshape(pooled, {encoded.cols()});
}

Tensor ClassLogits(Tape& tape, const Tensor& sentence, const Tensor& weights,
                   const Tensor& bias) {
  const Tensor row = tape.Reshape(sentence, {1, sentence.size()});
  return tape.Reshape(tape.AddRowBias(tape.MatMul(row, weights), bias), {weights.cols()});
}

Tensor Classify(Tape& tape, const Tensor& sentence, const Tensor& weights,
                const Tensor& bias) {
  return tape.Softmax(ClassLogits(tape, sentence, weights, bias));
}

std::size_t Argmax(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ForwardResult Forward(Tape& tape, const PhaseModel& model, std::span<const TokenId> tokens,
                      std::span<const TokenId> target_tokens) {
  if (tokens.empty()) throw ContractError("forward: empty token sequence");
  const Tensor words = tape.GatherRows(model.embeddings, tokens);
  const Tensor encoded =
      BiLstmEncode(tape, words, model.forward_lstm, model.backward_lstm);

  ForwardResult result;
  Tensor sentence;
  if (model.config.attention) {
    const Tensor query = TargetQuery(tape, model.embeddings, target_tokens);
    result.attention = AttentionWeights(tape, Augment(tape, words, query),
                                        model.attention_weights, model.attention_bias);
    sentence = Attend(tape, encoded, result.attention);
  } else {
    const std::size_t m = tokens.size();
    result.attention =
        Tensor::FromValues({m}, std::vector<double>(m, 1.0 / static_cast<double>(m)));
    sentence = tape.MeanRows(encoded);
  }
  result.logits =
      ClassLogits(tape, sentence, model.classifier_weights, model.classifier_bias);
  result.probs = tape.Softmax(result.logits);
  return result;
}

// ---------------------------------------------------------------------------
// Pretrained vectors

std::size_t LoadPretrainedEmbeddings(PhaseModel& model, const Vocab& vocab,
                                     const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  const std::size_t d = model.config.embed_dim;
  auto table = model.embeddings.mutable_values();
  std::size_t loaded = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> vec;
    double v;
    while (fields >> v) vec.push_back(v);
    if (line_no == 1 && vec.size() == 1) continue;  // "count dim" header
    if (vec.size() != d) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(d) + " values, got " + std::to_string(vec.size()));
    }
    if (!vocab.Contains(token)) continue;
    const TokenId id = vocab.Id(token);
    if (id == Vocab::kPad || id == Vocab::kUnk) continue;
    std::copy(vec.begin(), vec.end(), table.begin() + id * d);
    ++loaded;
  }
  return loaded;
}

// ---------------------------------------------------------------------------
// Checkpoints

void SavePhaseModel(const std::filesystem::path& path, const PhaseModel& model,
                    const Vocab& vocab) {
  if (vocab.size() != model.config.vocab_size) {
    throw ContractError("vocabulary size does not match the model");
  }
  ByteWriter w;
  w.Raw(kMagic);
  w.U32(kCheckpointVersion);
  const ModelConfig& c = model.config;
  w.U64(c.vocab_size);
  w.U64(c.embed_dim);
  w.U64(c.hidden_dim);
  w.U64(c.seed);
  w.F64(c.init_scale);
  w.U8(c.attention ? 1 : 0);

  w.U64(vocab.size());
  for (const std::string& t : vocab.tokens()) w.Str(t);

  const auto params = model.Parameters();
  const auto names = PhaseModel::ParameterNames();
  w.U32(static_cast<std::uint32_t>(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    w.Str(names[k]);
    w.U32(static_cast<std::uint32_t>(params[k].rank()));
    for (std::size_t dim : params[k].shape()) w.U64(dim);
    for (double v : params[k].values()) w.F64(v);
  }
  w.Raw(kTrailer);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw DataError("write failed for " + path.string());
}

LoadedPhaseModel LoadPhaseModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ByteReader r(buffer.str(), path.string());

  if (r.Raw(kMagic.size()) != kMagic) throw LoadError(path.string() + ": not a checkpoint");
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw VersionMismatchError(path.string() + ": checkpoint version " +
                               std::to_string(version) + ", expected " +
                               std::to_string(kCheckpointVersion));
  }
  ModelConfig c;
  c.vocab_size = r.U64();
  c.embed_dim = r.U64();
  c.hidden_dim = r.U64();
  c.seed = r.U64();
  c.init_scale = r.F64();
  c.attention = r.U8() != 0;
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw ShapeMismatchError(path.string() + ": bad config: " + e.what());
  }

  const std::uint64_t vocab_size = r.U64();
  if (vocab_size != c.vocab_size) {
    throw ShapeMismatchError(path.string() + ": vocabulary holds " +
                             std::to_string(vocab_size) + " tokens, config says " +
                             std::to_string(c.vocab_size));
  }
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) tokens.push_back(r.Str());

  const auto names = PhaseModel::ParameterNames();
  const auto shapes = PhaseModel::ParameterShapes(c);
  const std::uint32_t count = r.U32();
  if (count != names.size()) {
    throw ShapeMismatchError(path.string() + ": " + std::to_string(count) +
                             " parameter arrays, expected " + std::to_string(names.size()));
  }
  std::vector<Tensor> params;
  for (std::size_t k = 0; k < count; ++k) {
    const std::string name = r.Str();
    if (name != names[k]) {
      throw ShapeMismatchError(path.string() + ": parameter '" + name + "' where '" +
                               names[k] + "' was expected");
    }
    Shape shape(r.U32());
    for (std::size_t& dim : shape) dim = r.U64();
    if (shape != shapes[k]) {
      throw ShapeMismatchError(path.string() + ": parameter '" + name + "' has shape " +
                               ShapeString(shape) + ", expected " + ShapeString(shapes[k]));
    }
    std::size_t n = 1;
    for (std::size_t dim : shape) n *= dim;
    std::vector<double> values(n);
    for (double& v : values) v = r.F64();
    params.push_back(Tensor::FromValues(std::move(shape), std::move(values), true));
  }
  if (r.Raw(kTrailer.size()) != kTrailer || !r.AtEnd()) {
    throw LoadError(path.string() + ": corrupt trailer");
  }

  LoadedPhaseModel loaded{PhaseModel{}, Vocab::FromTokens(std::move(tokens))};
  PhaseModel& m = loaded.model;
  m.config = c;
  m.embeddings = params[0];
  m.forward_lstm = {params[1], params[2], params[3]};
  m.backward_lstm = {params[4], params[5], params[6]};
  m.attention_weights = params[7];
  m.attention_bias = params[8];
  m.classifier_weights = params[9];
  m.classifier_bias = params[10];
  return loaded;
}

}  // namespace stance
