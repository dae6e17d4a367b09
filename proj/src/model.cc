// Copyright 2026 The secmoe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "secmoe/model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "secmoe/prg.h"
#include "secmoe/protocols/nonlinear.h"

namespace secmoe {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

void ModelConfig::validate() const {
  SECMOE_ENFORCE(d_model >= 1 && d_ff >= 1 && num_layers >= 1 && seq_len >= 1,
                 ErrorCode::kInvalidConfig, "model dimensions must be positive");
  SECMOE_ENFORCE(num_heads >= 1 && d_model % num_heads == 0,
                 ErrorCode::kInvalidConfig, "{} heads do not divide d_model {}",
                 num_heads, d_model);
  SECMOE_ENFORCE(n_experts >= 1, ErrorCode::kInvalidConfig,
                 "a mixture needs at least one expert");
  SECMOE_ENFORCE(k_experts == 1, ErrorCode::kUnsupportedK,
                 "only top-1 routing is supported, got k={}", k_experts);
}

namespace {

bool parse_size(std::string_view s, size_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

ModelConfig ModelConfig::named(std::string_view name) {
  struct Family {
    std::string_view prefix;
    size_t d_model, d_ff, heads, layers;
  };
  static constexpr Family kFamilies[] = {{"toy-moe-", 64, 128, 4, 2},
                                         {"tiny-moe-", 16, 32, 2, 1}};
  for (const auto& f : kFamilies) {
    if (!name.starts_with(f.prefix) || !name.ends_with("e")) continue;
    auto digits = name.substr(f.prefix.size(),
                              name.size() - f.prefix.size() - 1);
    size_t experts = 0;
    if (!parse_size(digits, experts) || experts == 0) break;
    ModelConfig c;
    c.name = std::string(name);
    c.d_model = f.d_model;
    c.d_ff = f.d_ff;
    c.num_heads = f.heads;
    c.num_layers = f.layers;
    c.n_experts = experts;
    return c;
  }
  SECMOE_THROW(ErrorCode::kInvalidConfig,
               "unknown model config '{}' (expected toy-moe-<E>e or "
               "tiny-moe-<E>e)",
               name);
}

// ---------------------------------------------------------------------------
// Weight store

namespace {

template <class Store, class Out>
void visit_tensors(Store& s, Out& out) {
  for (size_t l = 0; l < s.layers.size(); ++l) {
    auto& L = s.layers[l];
    const std::string p = fmt::format("layer{}.", l);
    out.emplace_back(p + "attn.wq", &L.attn.wq);
    out.emplace_back(p + "attn.wk", &L.attn.wk);
    out.emplace_back(p + "attn.wv", &L.attn.wv);
    out.emplace_back(p + "attn.wo", &L.attn.wo);
    out.emplace_back(p + "ln1.gamma", &L.ln1_gamma);
    out.emplace_back(p + "ln1.beta", &L.ln1_beta);
    out.emplace_back(p + "gate", &L.gate);
    for (size_t e = 0; e < L.experts.size(); ++e) {
      const std::string q = fmt::format("{}expert{}.", p, e);
      out.emplace_back(q + "w1", &L.experts[e].w1);
      out.emplace_back(q + "v", &L.experts[e].v);
      out.emplace_back(q + "w2", &L.experts[e].w2);
    }
    out.emplace_back(p + "ln2.gamma", &L.ln2_gamma);
    out.emplace_back(p + "ln2.beta", &L.ln2_beta);
  }
}

// Layout implied by the config, with every tensor zero.
WeightStore skeleton(const ModelConfig& cfg, FixedConfig fixed) {
  cfg.validate();
  fixed.validate();
  const size_t d = cfg.d_model, f = cfg.d_ff;
  auto mat = [&](size_t r, size_t c) { return FixedTensor({r, c}, fixed); };
  auto vec = [&](size_t n) { return FixedTensor({n}, fixed); };
  WeightStore s;
  s.config = cfg;
  s.fixed = fixed;
  for (size_t l = 0; l < cfg.num_layers; ++l) {
    LayerWeights L;
    L.attn = {mat(d, d), mat(d, d), mat(d, d), mat(d, d)};
    L.ln1_gamma = vec(d);
    L.ln1_beta = vec(d);
    L.gate = mat(d, cfg.n_experts);
    for (size_t e = 0; e < cfg.n_experts; ++e)
      L.experts.push_back({mat(d, f), mat(d, f), mat(f, d)});
    L.ln2_gamma = vec(d);
    L.ln2_beta = vec(d);
    s.layers.push_back(std::move(L));
  }
  return s;
}

}  // namespace

std::vector<std::pair<std::string, const FixedTensor*>> WeightStore::tensors()
    const {
  std::vector<std::pair<std::string, const FixedTensor*>> out;
  visit_tensors(*this, out);
  return out;
}

std::vector<std::pair<std::string, FixedTensor*>> WeightStore::tensors() {
  std::vector<std::pair<std::string, FixedTensor*>> out;
  visit_tensors(*this, out);
  return out;
}

void WeightStore::validate() const {
  const WeightStore ref = skeleton(config, fixed);
  auto want = ref.tensors();
  auto have = tensors();
  SECMOE_ENFORCE(want.size() == have.size(), ErrorCode::kDimensionMismatch,
                 "store holds {} tensors, config implies {}", have.size(),
                 want.size());
  for (size_t i = 0; i < want.size(); ++i)
    SECMOE_ENFORCE(want[i].second->dims() == have[i].second->dims(),
                   ErrorCode::kDimensionMismatch,
                   "tensor {} has the wrong shape", have[i].first);
}

bool WeightStore::operator==(const WeightStore& o) const {
  if (!(config == o.config) || !(fixed == o.fixed) || seed != o.seed)
    return false;
  auto a = tensors();
  auto b = o.tensors();
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].first != b[i].first || !(*a[i].second == *b[i].second))
      return false;
  return true;
}

WeightStore gen_weights(const ModelConfig& cfg, uint64_t seed,
                        FixedConfig fixed) {
  WeightStore s = skeleton(cfg, fixed);
  s.seed = seed;
  // One stream per tensor, so a tensor's values do not depend on how many
  // tensors precede it.
  uint64_t stream = 0;
  for (auto& [name, t] : s.tensors()) {
    Prg prg(seed, 0x57000000ULL + stream++);
    for (auto& w : t->raw()) w = encode(0.2 * prg.next_unit() - 0.1, fixed);
  }
  return s;
}

WeightStore shape_only(const ModelConfig& cfg, FixedConfig fixed) {
  return skeleton(cfg, fixed);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::string_view kManifestName = "manifest.txt";
constexpr std::string_view kFormat = "secmoe-weights";
constexpr int kFormatVersion = 1;

std::string dims_string(const Shape& dims) {
  std::string s;
  for (size_t i = 0; i < dims.size(); ++i)
    s += (i ? "x" : "") + std::to_string(dims[i]);
  return s;
}

std::string blob_name(const std::string& tensor) { return tensor + ".bin"; }

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  SECMOE_ENFORCE(out.good(), ErrorCode::kIo, "cannot open {} for writing",
                 path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  SECMOE_ENFORCE(out.good(), ErrorCode::kIo, "write to {} failed",
                 path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  SECMOE_ENFORCE(in.good(), ErrorCode::kIo, "cannot open {}", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Manifest = std::map<std::string, std::string, std::less<>>;

Manifest parse_manifest(const std::string& text, const fs::path& path) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    SECMOE_ENFORCE(eq != std::string::npos && eq > 0, ErrorCode::kMalformedFile,
                   "{}:{}: expected key=value", path.string(), lineno);
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

const std::string& need(const Manifest& m, std::string_view key) {
  auto it = m.find(key);
  SECMOE_ENFORCE(it != m.end(), ErrorCode::kMalformedFile,
                 "manifest is missing '{}'", key);
  return it->second;
}

size_t need_size(const Manifest& m, std::string_view key) {
  size_t v = 0;
  SECMOE_ENFORCE(parse_size(need(m, key), v), ErrorCode::kMalformedFile,
                 "manifest key '{}' is not a count", key);
  return v;
}

}  // namespace

void save_weights(const WeightStore& store, const fs::path& dir) {
  store.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  SECMOE_ENFORCE(!ec, ErrorCode::kIo, "cannot create {}: {}", dir.string(),
                 ec.message());
  const auto& c = store.config;
  std::string man = fmt::format(
      "format={}\nversion={}\nconfig={}\nd_model={}\nd_ff={}\nnum_heads={}\n"
      "num_layers={}\nn_experts={}\nk_experts={}\nseq_len={}\nseed={}\n"
      "scale={}\nell={}\n",
      kFormat, kFormatVersion, c.name, c.d_model, c.d_ff, c.num_heads,
      c.num_layers, c.n_experts, c.k_experts, c.seq_len, store.seed,
      store.fixed.scale, store.fixed.ell);
  const auto tensors = store.tensors();
  man += fmt::format("tensors={}\n", tensors.size());
  for (const auto& [name, t] : tensors) {
    man += fmt::format("tensor.{}={} {}\n", name, dims_string(t->dims()),
                       blob_name(name));
    std::string blob(t->size() * 8, '\0');
    for (size_t i = 0; i < t->size(); ++i)
      for (int b = 0; b < 8; ++b)
        blob[i * 8 + b] = static_cast<char>(((*t)[i] >> (8 * b)) & 0xff);
    write_file(dir / blob_name(name), blob);
  }
  write_file(dir / kManifestName, man);
}

namespace {

WeightStore load_impl(const fs::path& dir, bool with_tensors) {
  const fs::path mpath = dir / kManifestName;
  const Manifest m = parse_manifest(read_file(mpath), mpath);
  SECMOE_ENFORCE(need(m, "format") == kFormat, ErrorCode::kMalformedFile,
                 "{} is not a weight manifest", mpath.string());
  SECMOE_ENFORCE(need_size(m, "version") == kFormatVersion,
                 ErrorCode::kMalformedFile, "unsupported manifest version {}",
                 need(m, "version"));
  ModelConfig c;
  c.name = need(m, "config");
  c.d_model = need_size(m, "d_model");
  c.d_ff = need_size(m, "d_ff");
  c.num_heads = need_size(m, "num_heads");
  c.num_layers = need_size(m, "num_layers");
  c.n_experts = need_size(m, "n_experts");
  c.k_experts = need_size(m, "k_experts");
  c.seq_len = need_size(m, "seq_len");
  FixedConfig fixed{static_cast<int>(need_size(m, "ell")),
                    static_cast<int>(need_size(m, "scale"))};
  size_t seed = need_size(m, "seed");

  WeightStore s = skeleton(c, fixed);
  s.seed = seed;
  auto tensors = s.tensors();
  SECMOE_ENFORCE(need_size(m, "tensors") == tensors.size(),
                 ErrorCode::kDimensionMismatch,
                 "manifest lists {} tensors, config implies {}",
                 need(m, "tensors"), tensors.size());
  if (!with_tensors) return s;

  for (auto& [name, t] : tensors) {
    const std::string& entry = need(m, "tensor." + name);
    auto sp = entry.find(' ');
    SECMOE_ENFORCE(sp != std::string::npos, ErrorCode::kMalformedFile,
                   "tensor entry for {} needs dims and a file name", name);
    SECMOE_ENFORCE(entry.substr(0, sp) == dims_string(t->dims()),
                   ErrorCode::kDimensionMismatch,
                   "tensor {} is {} in the manifest, config implies {}", name,
                   entry.substr(0, sp), dims_string(t->dims()));
    const std::string file = entry.substr(sp + 1);
    SECMOE_ENFORCE(!file.empty() && file.find('/') == std::string::npos &&
                       file.find("..") == std::string::npos,
                   ErrorCode::kMalformedFile, "bad blob name '{}'", file);
    const std::string blob = read_file(dir / file);
    SECMOE_ENFORCE(blob.size() == t->size() * 8, ErrorCode::kMalformedFile,
                   "blob {} holds {} bytes, expected {}", file, blob.size(),
                   t->size() * 8);
    const uint64_t mask = fixed.mask();
    for (size_t i = 0; i < t->size(); ++i) {
      uint64_t w = 0;
      for (int b = 0; b < 8; ++b)
        w |= uint64_t{static_cast<uint8_t>(blob[i * 8 + b])} << (8 * b);
      SECMOE_ENFORCE((w & ~mask) == 0, ErrorCode::kMalformedFile,
                     "blob {} word {} exceeds the {}-bit ring", file, i,
                     fixed.ell);
      (*t)[i] = w;
    }
  }
  return s;
}

}  // namespace

WeightStore load_weights(const fs::path& dir) { return load_impl(dir, true); }
WeightStore load_manifest(const fs::path& dir) { return load_impl(dir, false); }

std::vector<std::vector<double>> parse_token_text(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      if (tok[0] == '#') break;
      double v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      SECMOE_ENFORCE(ec == std::errc() && p == tok.data() + tok.size() &&
                         std::isfinite(v),
                     ErrorCode::kMalformedFile, "line {}: '{}' is not a real",
                     lineno, tok);
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

FixedTensor read_tokens(const fs::path& path, const ModelConfig& cfg,
                        FixedConfig fixed) {
  auto rows = parse_token_text(read_file(path));
  SECMOE_ENFORCE(rows.size() == cfg.seq_len, ErrorCode::kDimensionMismatch,
                 "{} holds {} tokens, the model expects {}", path.string(),
                 rows.size(), cfg.seq_len);
  std::vector<double> flat;
  for (const auto& r : rows) {
    SECMOE_ENFORCE(r.size() == cfg.d_model, ErrorCode::kDimensionMismatch,
                   "token of width {}, the model expects {}", r.size(),
                   cfg.d_model);
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return FixedTensor::from_reals({cfg.seq_len, cfg.d_model}, flat, fixed);
}

std::string_view protocol_name(MoeProtocol p) {
  return p == MoeProtocol::kSecMoe ? "secmoe" : "dense";
}

MoeProtocol parse_protocol(std::string_view name) {
  if (name == "secmoe") return MoeProtocol::kSecMoe;
  if (name == "dense") return MoeProtocol::kDense;
  SECMOE_THROW(ErrorCode::kParameter, "unknown protocol '{}'", name);
}

// ---------------------------------------------------------------------------
// Forward passes

namespace {

using MoeFn = std::function<ArithShare(const ArithShare& h, const ArithShare&
                                       scores, const LayerWeights& L)>;
using PhaseFn = std::function<void(size_t layer, const char* phase)>;

// Post-norm block: h1 = LN(x + attn(x)), h2 = LN(h1 + moe(h1)). The gate is
// a plaintext linear router on h1.
ArithShare forward_impl(Evaluator& ev, Linear& lin, const WeightStore& w,
                        ArithShare x, const MoeFn& moe, const PhaseFn& phase) {
  const auto& c = w.config;
  const size_t T = c.seq_len, d = c.d_model;
  SECMOE_ENFORCE(x.size() == T * d, ErrorCode::kDimensionMismatch,
                 "forward input has {} values, expected {}x{}", x.size(), T, d);
  for (size_t l = 0; l < w.layers.size(); ++l) {
    const auto& L = w.layers[l];
    ArithShare a = attention(ev, lin, x, T, c.num_heads, L.attn);
    phase(l, "attention");
    ArithShare h1 = layernorm(ev, ev.add(x, a), T, d, L.ln1_gamma.raw(),
                              L.ln1_beta.raw());
    phase(l, "layernorm1");
    ArithShare scores = ev.rescale(lin.project(h1, T, d, L.gate));
    phase(l, "gate");
    ArithShare y = moe(h1, scores, L);
    phase(l, "moe");
    x = layernorm(ev, ev.add(h1, y), T, d, L.ln2_gamma.raw(), L.ln2_beta.raw());
    phase(l, "layernorm2");
  }
  return x;
}

}  // namespace

FixedTensor plain_forward(const WeightStore& store, const FixedTensor& tokens,
                          const MoeOptions& opts) {
  store.validate();
  const auto& c = store.config;
  SECMOE_ENFORCE(tokens.size() == c.seq_len * c.d_model,
                 ErrorCode::kDimensionMismatch,
                 "tokens hold {} values, expected {}x{}", tokens.size(),
                 c.seq_len, c.d_model);
  SECMOE_ENFORCE(tokens.config() == store.fixed, ErrorCode::kScaleMismatch,
                 "tokens and weights use different fixed-point configs");
  PlainEvaluator ev(store.fixed);
  PlainLinear lin(store.fixed);
  MoeFn moe = [&](const ArithShare& h, const ArithShare& s,
                  const LayerWeights& L) {
    return plain_sparse_moe(ev, h, c.seq_len, s, L.experts, opts);
  };
  ArithShare out =
      forward_impl(ev, lin, store, ArithShare(tokens.raw(), store.fixed.scale),
                   moe, [](size_t, const char*) {});
  return FixedTensor({c.seq_len, c.d_model}, std::move(out.v), store.fixed);
}

ArithShare secure_forward(Party& p, const WeightStore& store,
                          const ArithShare& tokens, const ForwardOptions& opts,
                          ForwardTrace* trace) {
  store.validate();
  SECMOE_ENFORCE(p.cfg() == store.fixed, ErrorCode::kScaleMismatch,
                 "session and weights use different fixed-point configs");
  const auto& c = store.config;
  SecureEvaluator ev(p);
  HeLinear lin(p);
  if (trace) trace->layers.assign(c.num_layers, {});
  size_t layer = 0;
  MoeFn moe = [&](const ArithShare& h, const ArithShare& s,
                  const LayerWeights& L) {
    if (opts.protocol == MoeProtocol::kSecMoe) {
      MoePhaseStats split;
      auto y = secure_sparse_moe(p, h, c.seq_len, s, L.experts, opts.moe, &split);
      if (trace) trace->layers[layer].moe_split = split;
      return y;
    }
    return dense_moe(ev, lin, h, c.seq_len, s, L.experts, opts.moe);
  };
  ChannelStats last = p.ep().stats();
  PhaseFn phase = [&](size_t l, const char* name) {
    const ChannelStats now = p.ep().stats();
    if (trace) trace->layers[l].phases.emplace_back(name, now - last);
    last = now;
    layer = l;
  };
  return forward_impl(ev, lin, store, tokens, moe, phase);
}

// ---------------------------------------------------------------------------
// Double-precision shadow

namespace {

using Mat = std::vector<double>;  // row-major

Mat reals(const FixedTensor& t) { return t.to_reals(); }

Mat matmul(const Mat& a, const Mat& b, size_t k, size_t m, size_t n) {
  Mat out(k * n, 0.0);
  for (size_t i = 0; i < k; ++i)
    for (size_t t = 0; t < m; ++t) {
      const double av = a[i * m + t];
      for (size_t j = 0; j < n; ++j) out[i * n + j] += av * b[t * n + j];
    }
  return out;
}

double exp_iterated(double x, const ExpSpec& spec) {
  if (x < spec.threshold) return 0.0;
  double y = 1.0 + std::ldexp(x, -spec.iterations);
  for (int i = 0; i < spec.iterations; ++i) y *= y;
  return y;
}

Mat layernorm_shadow(const Mat& x, size_t rows, size_t cols, const Mat& gamma,
                     const Mat& beta) {
  Mat out(x.size());
  for (size_t r = 0; r < rows; ++r) {
    double mean = 0, var = 0;
    for (size_t j = 0; j < cols; ++j) mean += x[r * cols + j];
    mean /= static_cast<double>(cols);
    for (size_t j = 0; j < cols; ++j) var += std::pow(x[r * cols + j] - mean, 2);
    var = var / static_cast<double>(cols) + kLayerNormEpsilon;
    const double inv = 1.0 / std::sqrt(var);
    for (size_t j = 0; j < cols; ++j)
      out[r * cols + j] = (x[r * cols + j] - mean) * inv * gamma[j] + beta[j];
  }
  return out;
}

Mat attention_shadow(const Mat& x, size_t T, size_t heads,
                     const AttentionWeights& w) {
  const size_t d = w.wq.rows(), dh = d / heads;
  Mat q = matmul(x, reals(w.wq), T, d, d);
  Mat k = matmul(x, reals(w.wk), T, d, d);
  Mat v = matmul(x, reals(w.wv), T, d, d);
  Mat merged(T * d, 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const ExpSpec spec;
  for (size_t h = 0; h < heads; ++h) {
    for (size_t i = 0; i < T; ++i) {
      std::vector<double> s(T);
      double mx = -INFINITY;
      for (size_t j = 0; j < T; ++j) {
        double acc = 0;
        for (size_t t = 0; t < dh; ++t)
          acc += q[i * d + h * dh + t] * k[j * d + h * dh + t];
        s[j] = acc * scale;
        mx = std::max(mx, s[j]);
      }
      double sum = 0;
      for (auto& e : s) sum += (e = exp_iterated(e - mx, spec));
      for (size_t t = 0; t < dh; ++t) {
        double acc = 0;
        for (size_t j = 0; j < T; ++j) acc += s[j] / sum * v[j * d + h * dh + t];
        merged[i * d + h * dh + t] = acc;
      }
    }
  }
  return matmul(merged, reals(w.wo), T, d, d);
}

Mat ffn_shadow(const Mat& x, size_t T, const ExpertWeights& e) {
  const size_t m = e.w1.rows(), n = e.w1.cols();
  Mat a = matmul(x, reals(e.w1), T, m, n);
  Mat b = matmul(x, reals(e.v), T, m, n);
  for (size_t i = 0; i < a.size(); ++i) a[i] = gelu_plain(a[i]) * b[i];
  return matmul(a, reals(e.w2), T, n, m);
}

}  // namespace

std::vector<double> shadow_forward(const WeightStore& store,
                                   const std::vector<double>& tokens,
                                   const MoeOptions& opts) {
  store.validate();
  const auto& c = store.config;
  const size_t T = c.seq_len, d = c.d_model, E = c.n_experts;
  SECMOE_ENFORCE(tokens.size() == T * d, ErrorCode::kDimensionMismatch,
                 "tokens hold {} values, expected {}x{}", tokens.size(), T, d);
  Mat x = tokens;
  for (const auto& L : store.layers) {
    Mat a = attention_shadow(x, T, c.num_heads, L.attn);
    for (size_t i = 0; i < x.size(); ++i) a[i] += x[i];
    Mat h1 = layernorm_shadow(a, T, d, reals(L.ln1_gamma), reals(L.ln1_beta));
    Mat scores = matmul(h1, reals(L.gate), T, d, E);
    Mat y(T * d);
    for (size_t t = 0; t < T; ++t) {
      size_t best = 0;
      for (size_t e = 1; e < E; ++e)
        if (scores[t * E + e] > scores[t * E + best]) best = e;
      Mat row(h1.begin() + t * d, h1.begin() + (t + 1) * d);
      Mat out = ffn_shadow(row, 1, L.experts[best]);
      // With one selected expert the renormalized gate weight is exactly 1.
      (void)opts;
      std::copy(out.begin(), out.end(), y.begin() + t * d);
    }
    for (size_t i = 0; i < y.size(); ++i) y[i] += h1[i];
    x = layernorm_shadow(y, T, d, reals(L.ln2_gamma), reals(L.ln2_beta));
  }
  return x;
}

}  // namespace secmoe
