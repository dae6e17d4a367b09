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

#include "secmoe/protocols/layers.h"

#include <bit>
#include <cmath>

namespace secmoe {

namespace {

void check_weight(const FixedTensor& w, size_t m, size_t n) {
  SECMOE_ENFORCE(w.rank() == 2 && w.rows() == m && w.cols() == n,
                 ErrorCode::kDimensionMismatch, "weight {} where {}x{} expected",
                 shape_str(w.dims()), m, n);
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear backends

std::vector<ArithShare> PlainLinear::project(
    const ArithShare& x, size_t k, size_t m,
    std::span<const FixedTensor* const> weights, bool) {
  SECMOE_ENFORCE(x.size() == k * m, ErrorCode::kDimensionMismatch,
                 "activation of {} values as {}x{}", x.size(), k, m);
  std::vector<ArithShare> out;
  FixedTensor xt({k, m}, x.v, cfg_);
  for (const FixedTensor* w : weights) {
    check_weight(*w, m, w->cols());
    out.emplace_back(ring_matmul(xt, *w).raw(), x.frac + cfg_.scale);
  }
  return out;
}

void send_ciphertexts(Party& p, Tag tag, std::span<const he::Ciphertext> cts) {
  std::vector<uint8_t> buf;
  buf.reserve(cts.size() * p.he().params().ct_bytes());
  for (const auto& ct : cts) {
    auto b = ct.serialize();
    buf.insert(buf.end(), b.begin(), b.end());
  }
  p.ep().send(tag, buf);
}

std::vector<he::Ciphertext> recv_ciphertexts(Party& p, Tag tag, size_t count) {
  auto buf = p.ep().recv(tag);
  const size_t each = p.he().params().ct_bytes();
  SECMOE_ENFORCE(buf.size() == count * each, ErrorCode::kProtocol,
                 "expected {} ciphertexts, got {} bytes", count, buf.size());
  std::vector<he::Ciphertext> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i)
    out.push_back(he::Ciphertext::deserialize(
        std::span(buf).subspan(i * each, each), p.he().params()));
  return out;
}

he::Ciphertext client_encrypt(Party& p, const he::Plaintext& pt) {
  p.counters().he_encrypt += 1;
  if (p.dry()) return p.he().zero();
  return p.secret_key().encrypt(pt);
}

he::Plaintext uniform_plaintext(Party& p) {
  he::Plaintext r(p.he().params().ring_degree);
  for (auto& c : r.coeffs) c = p.prg().next_ring(p.ell());
  return r;
}

namespace {

he::Plaintext negated(const he::Plaintext& a, uint64_t mask) {
  he::Plaintext out = a;
  for (auto& c : out.coeffs) c = (0 - c) & mask;
  return out;
}

// Server side: masks every response, keeps the masks as its share and sends
// the masked ciphertexts. `layout` maps each response to its output
// positions: out_offset + flat index, coefficient.
struct Response {
  he::Ciphertext ct;
  size_t share;      // which output share
  size_t offset;     // added to the flat output index
  size_t bi, bj;     // block position in the plan
  const he::MatmulPlan* plan;
};

// Client side: decrypts and extracts every response into its share.
void receive_responses(Party& p, std::vector<Response>& layout,
                       std::vector<ArithShare>& shares) {
  auto cts = recv_ciphertexts(p, tags::kHeResponse, layout.size());
  for (size_t r = 0; r < layout.size(); ++r) {
    p.counters().he_decrypt += 1;
    if (p.dry()) continue;
    he::Plaintext pt = p.secret_key().decrypt(cts[r]);
    const Response& L = layout[r];
    auto& out = shares[L.share].v;
    L.plan->for_each_output(L.bi, L.bj, [&](size_t idx, size_t coeff) {
      out[L.offset + idx] = pt.coeffs[coeff] & p.mask();
    });
  }
}

void send_responses(Party& p, std::vector<Response>& layout,
                    std::vector<ArithShare>& shares) {
  std::vector<he::Ciphertext> cts;
  cts.reserve(layout.size());
  const uint64_t mask = p.mask();
  for (auto& L : layout) {
    he::Plaintext r = uniform_plaintext(p);
    auto& out = shares[L.share].v;
    L.plan->for_each_output(L.bi, L.bj, [&](size_t idx, size_t coeff) {
      out[L.offset + idx] = r.coeffs[coeff] & mask;
    });
    if (p.dry()) {
      cts.push_back(p.he().zero());
    } else {
      cts.push_back(p.he().add_plain(L.ct, negated(r, mask)));
    }
  }
  send_ciphertexts(p, tags::kHeResponse, cts);
}

}  // namespace

std::vector<ArithShare> HeLinear::project(
    const ArithShare& x, size_t k, size_t m,
    std::span<const FixedTensor* const> weights, bool reuse_input) {
  SECMOE_ENFORCE(!weights.empty(), ErrorCode::kDimensionMismatch,
                 "projection without weights");
  SECMOE_ENFORCE(x.size() == k * m, ErrorCode::kDimensionMismatch,
                 "activation of {} values as {}x{}", x.size(), k, m);
  const size_t n = weights[0]->cols();
  for (const FixedTensor* w : weights) check_weight(*w, m, n);
  const size_t degree = p_.he().params().ring_degree;
  const auto plan = he::MatmulPlan::choose(k, m, n, degree);

  // Input: client encrypts its share, server adds its own.
  const std::array<size_t, 3> key{k, m, n};
  if (reuse_input) {
    SECMOE_ENFORCE(cache_.count(key) == 1, ErrorCode::kProtocol,
                   "no encrypted {}x{} activation to reuse", k, m);
  } else if (p_.is_client()) {
    std::vector<he::Ciphertext> cts;
    if (p_.dry()) {
      for (size_t i = 0; i < plan.num_inputs(); ++i)
        cts.push_back(client_encrypt(p_, he::Plaintext()));
    } else {
      for (const auto& pt : plan.encode_inputs(x.v, degree))
        cts.push_back(client_encrypt(p_, pt));
    }
    send_ciphertexts(p_, tags::kHeInput, cts);
    cache_[key] = {};
  } else {
    auto cts = recv_ciphertexts(p_, tags::kHeInput, plan.num_inputs());
    if (!p_.dry()) {
      auto own = plan.encode_inputs(x.v, degree);
      for (size_t i = 0; i < cts.size(); ++i)
        cts[i] = p_.he().add_plain(cts[i], own[i]);
    }
    cache_[key] = std::move(cts);
  }
  const auto& input = cache_[key];

  std::vector<ArithShare> shares(
      weights.size(), ArithShare(std::vector<uint64_t>(k * n, 0), x.frac + p_.cfg().scale));
  std::vector<Response> layout;
  for (size_t w = 0; w < weights.size(); ++w) {
    std::vector<he::Plaintext> enc;
    const bool compute = !p_.is_client() && !p_.dry();
    if (compute) enc = plan.encode_weights(weights[w]->raw(), degree);
    for (size_t bi = 0; bi < plan.k_blocks(); ++bi)
      for (size_t bj = 0; bj < plan.n_blocks(); ++bj) {
        Response r{he::Ciphertext(), w, 0, bi, bj, &plan};
        if (!p_.is_client()) {
          p_.counters().he_mul_plain += plan.m_blocks();
          if (compute) {
            r.ct = p_.he().zero();
            for (size_t bm = 0; bm < plan.m_blocks(); ++bm)
              r.ct = p_.he().add(
                  r.ct, p_.he().mul_plain(input[bi * plan.m_blocks() + bm],
                                          enc[bm * plan.n_blocks() + bj]));
          }
        }
        layout.push_back(std::move(r));
      }
  }
  if (p_.is_client()) {
    receive_responses(p_, layout, shares);
  } else {
    send_responses(p_, layout, shares);
  }
  return shares;
}

// ---------------------------------------------------------------------------
// Expert feed-forward and attention

ArithShare expert_ffn(Evaluator& ev, Linear& lin, const ArithShare& x,
                      size_t tokens, const ExpertWeights& expert,
                      bool reuse_input) {
  const size_t m = expert.w1.rows(), n = expert.w1.cols();
  const FixedTensor* first[2] = {&expert.w1, &expert.v};
  auto proj = lin.project(x, tokens, m, first, reuse_input);
  ArithShare both = ev.rescale(concat(proj));
  ArithShare gate_in = slice(both, 0, tokens * n);
  ArithShare value = slice(both, tokens * n, tokens * n);
  ArithShare act = gelu(ev, gate_in);
  ArithShare glu = ev.mul_fx(act, value);
  return ev.rescale(lin.project(glu, tokens, n, expert.w2));
}

ArithShare attention(Evaluator& ev, Linear& lin, const ArithShare& x,
                     size_t tokens, size_t heads,
                     const AttentionWeights& weights) {
  const size_t d = weights.wq.rows();
  SECMOE_ENFORCE(heads >= 1 && d % heads == 0, ErrorCode::kInvalidConfig,
                 "{} heads do not divide width {}", heads, d);
  const size_t dh = d / heads;
  const FixedTensor* qkv_w[3] = {&weights.wq, &weights.wk, &weights.wv};
  auto qkv = ev.rescale(concat(lin.project(x, tokens, d, qkv_w)));
  ArithShare q = slice(qkv, 0, tokens * d);
  ArithShare k = slice(qkv, tokens * d, tokens * d);
  ArithShare v = slice(qkv, 2 * tokens * d, tokens * d);

  std::vector<ArithShare> qh, kt, vh;
  for (size_t h = 0; h < heads; ++h) {
    qh.push_back(col_block(q, tokens, d, h * dh, dh));
    kt.push_back(transpose(col_block(k, tokens, d, h * dh, dh), tokens, dh));
    vh.push_back(col_block(v, tokens, d, h * dh, dh));
  }
  ArithShare scores = concat(ev.matmul(qh, kt, tokens, dh, tokens));
  // 1/sqrt(dh) folds into the truncation when it is a power of two.
  const double root = std::sqrt(static_cast<double>(dh));
  const auto iroot = static_cast<uint64_t>(root);
  if (iroot * iroot == dh && std::has_single_bit(iroot)) {
    scores = ev.rescale(scores, std::countr_zero(iroot));
  } else {
    scores = ev.rescale(ev.mul_public(ev.rescale(scores), ev.enc(1.0 / root),
                                      ev.scale()));
  }
  ArithShare probs = softmax(ev, scores, heads * tokens, tokens);

  std::vector<ArithShare> ph;
  for (size_t h = 0; h < heads; ++h)
    ph.push_back(slice(probs, h * tokens * tokens, tokens * tokens));
  ArithShare ctx = ev.rescale(concat(ev.matmul(ph, vh, tokens, tokens, dh)));
  ArithShare merged(std::vector<uint64_t>(tokens * d), ctx.frac);
  for (size_t h = 0; h < heads; ++h)
    for (size_t t = 0; t < tokens; ++t)
      for (size_t j = 0; j < dh; ++j)
        merged.v[t * d + h * dh + j] = ctx.v[(h * tokens + t) * dh + j];
  return ev.rescale(lin.project(merged, tokens, d, weights.wo));
}

// ---------------------------------------------------------------------------
// Mixture of experts

Routing route_top1(Evaluator& ev, const ArithShare& scores, size_t tokens,
                   size_t n_experts) {
  SECMOE_ENFORCE(n_experts >= 1, ErrorCode::kInvalidConfig,
                 "a mixture needs at least one expert");
  auto top = topk(ev, scores, tokens, n_experts, 1, true);
  Routing r;
  r.indicator = ev.b2a(top.onehot);
  r.onehot = std::move(top.onehot);
  return r;
}

namespace {

void check_experts(std::span<const ExpertWeights> experts) {
  SECMOE_ENFORCE(!experts.empty(), ErrorCode::kInvalidConfig,
                 "a mixture needs at least one expert");
  const auto& e0 = experts[0];
  const size_t m = e0.w1.rows(), n = e0.w1.cols();
  for (const auto& e : experts) {
    check_weight(e.w1, m, n);
    check_weight(e.v, m, n);
    check_weight(e.w2, n, m);
  }
}

// Softmax weight of the selected expert among the top-1 set, which is one,
// as a scale-s value per token.
ArithShare gate_weight(Evaluator& ev, const ArithShare& indicator,
                       size_t tokens, size_t n_experts) {
  return ev.mul_public(row_sums(indicator, tokens, n_experts), ev.enc(1.0),
                       ev.scale());
}

}  // namespace

std::vector<SelectedExpert> select_experts(
    Party& p, const ArithShare& indicator, size_t tokens,
    std::span<const ExpertWeights> experts) {
  check_experts(experts);
  SECMOE_ENFORCE(p.he().params().kind == he::EngineKind::kSemantic,
                 ErrorCode::kEngineUnsupported,
                 "expert selection needs ciphertext products (semantic engine)");
  const size_t E = experts.size();
  SECMOE_ENFORCE(indicator.size() == tokens * E, ErrorCode::kDimensionMismatch,
                 "routing indicator has {} entries for {} tokens x {} experts",
                 indicator.size(), tokens, E);
  const size_t m = experts[0].w1.rows(), n = experts[0].w1.cols();
  const he::Engine& he = p.he();
  const size_t N = he.params().ring_degree;
  const bool server = !p.is_client();
  const bool compute = server && !p.dry();

  const size_t sel_cts = (tokens * E + N - 1) / N;
  auto packed = [&](size_t c) {
    he::Plaintext pt(N);
    for (size_t i = c * N; i < std::min(tokens * E, (c + 1) * N); ++i)
      pt.coeffs[i - c * N] = indicator.v[i];
    return pt;
  };
  std::vector<he::Ciphertext> sel;
  if (p.is_client()) {
    for (size_t c = 0; c < sel_cts; ++c) sel.push_back(client_encrypt(p, packed(c)));
    send_ciphertexts(p, tags::kHeSelection, sel);
    return {};
  }
  sel = recv_ciphertexts(p, tags::kHeSelection, sel_cts);
  if (compute)
    for (size_t c = 0; c < sel_cts; ++c) sel[c] = he.add_plain(sel[c], packed(c));

  const auto plan_in = he::MatmulPlan::choose(1, m, n, N);
  const auto plan_out = he::MatmulPlan::choose(1, n, m, N);
  std::vector<SelectedExpert> chosen(tokens);
  p.counters().he_mul_plain +=
      tokens * E * (2 * plan_in.m_blocks() * plan_in.n_blocks() +
                    plan_out.m_blocks() * plan_out.n_blocks());
  if (!compute) return chosen;
  // Each token's encrypted indicator coefficient scales every expert's
  // encoded weights; the sum keeps only the selected expert.
  auto select = [&](const he::MatmulPlan& plan, auto member) {
    const size_t blocks = plan.m_blocks() * plan.n_blocks();
    std::vector<std::vector<he::Ciphertext>> acc(
        tokens, std::vector<he::Ciphertext>(blocks, he.zero()));
    for (size_t e = 0; e < E; ++e) {
      auto enc = plan.encode_weights((experts[e].*member).raw(), N);
      for (size_t t = 0; t < tokens; ++t) {
        const size_t pos = t * E + e;
        for (size_t b = 0; b < blocks; ++b)
          acc[t][b] = he.add(acc[t][b],
                             he.mul_coeff_plain(sel[pos / N], pos % N, enc[b]));
      }
    }
    return acc;
  };
  auto w1 = select(plan_in, &ExpertWeights::w1);
  auto v = select(plan_in, &ExpertWeights::v);
  auto w2 = select(plan_out, &ExpertWeights::w2);
  for (size_t t = 0; t < tokens; ++t)
    chosen[t] = {std::move(w1[t]), std::move(v[t]), std::move(w2[t])};
  return chosen;
}

ArithShare secure_sparse_moe(Party& p, const ArithShare& x, size_t tokens,
                             const ArithShare& scores,
                             std::span<const ExpertWeights> experts,
                             const MoeOptions& opts, MoePhaseStats* phases) {
  check_experts(experts);
  SECMOE_ENFORCE(p.he().params().kind == he::EngineKind::kSemantic,
                 ErrorCode::kEngineUnsupported,
                 "sparse MoE needs ciphertext products (semantic engine)");
  const size_t E = experts.size();
  const size_t m = experts[0].w1.rows(), n = experts[0].w1.cols();
  SECMOE_ENFORCE(x.size() == tokens * m && scores.size() == tokens * E,
                 ErrorCode::kDimensionMismatch,
                 "MoE input {} and scores {} for {} tokens", x.size(),
                 scores.size(), tokens);
  SecureEvaluator ev(p);
  const he::Engine& he = p.he();
  const size_t N = he.params().ring_degree;
  const bool server = !p.is_client();
  const bool compute = server && !p.dry();
  const ChannelStats start = p.ep().stats();

  // --- selection ----------------------------------------------------------
  Routing routing = route_top1(ev, scores, tokens, E);
  const auto plan_in = he::MatmulPlan::choose(1, m, n, N);
  const auto plan_out = he::MatmulPlan::choose(1, n, m, N);
  std::vector<SelectedExpert> chosen =
      select_experts(p, routing.indicator, tokens, experts);
  const ChannelStats after_selection = p.ep().stats();

  // --- compute ------------------------------------------------------------
  // One encrypted-activation times encrypted-weight product per token.
  auto ct_matmul = [&](const ArithShare& act, size_t k_in, size_t k_out,
                       const he::MatmulPlan& plan,
                       std::vector<he::Ciphertext> SelectedExpert::*const* members,
                       size_t count) {
    std::vector<he::Ciphertext> acts;
    if (p.is_client()) {
      for (size_t t = 0; t < tokens; ++t) {
        ArithShare row = slice(act, t * k_in, k_in);
        if (p.dry()) {
          for (size_t i = 0; i < plan.num_inputs(); ++i)
            acts.push_back(client_encrypt(p, he::Plaintext()));
        } else {
          for (const auto& pt : plan.encode_inputs(row.v, N))
            acts.push_back(client_encrypt(p, pt));
        }
      }
      send_ciphertexts(p, tags::kHeInput, acts);
    } else {
      acts = recv_ciphertexts(p, tags::kHeInput, tokens * plan.num_inputs());
      if (compute)
        for (size_t t = 0; t < tokens; ++t) {
          auto own = plan.encode_inputs(slice(act, t * k_in, k_in).v, N);
          for (size_t i = 0; i < own.size(); ++i)
            acts[t * plan.num_inputs() + i] =
                he.add_plain(acts[t * plan.num_inputs() + i], own[i]);
        }
    }
    std::vector<ArithShare> shares(
        count, ArithShare(std::vector<uint64_t>(tokens * k_out, 0), 2 * p.cfg().scale));
    std::vector<Response> layout;
    for (size_t w = 0; w < count; ++w)
      for (size_t t = 0; t < tokens; ++t)
        for (size_t bj = 0; bj < plan.n_blocks(); ++bj) {
          Response r{he::Ciphertext(), w, t * k_out, 0, bj, &plan};
          if (server) {
            p.counters().he_mul_ct += plan.m_blocks();
            if (compute) {
              const auto& wts = chosen[t].*members[w];
              r.ct = he.zero();
              for (size_t bm = 0; bm < plan.m_blocks(); ++bm) {
                he::Ciphertext prod =
                    he.mul(acts[t * plan.num_inputs() + bm],
                           wts[bm * plan.n_blocks() + bj]);
                r.ct = bm == 0 ? prod : he.add(r.ct, prod);
              }
            }
          }
          layout.push_back(std::move(r));
        }
    if (p.is_client()) {
      receive_responses(p, layout, shares);
    } else {
      send_responses(p, layout, shares);
    }
    return shares;
  };

  SECMOE_ENFORCE(x.frac == p.cfg().scale, ErrorCode::kScaleMismatch,
                 "MoE input has {} fractional bits", x.frac);
  std::vector<he::Ciphertext> SelectedExpert::*first[2] = {&SelectedExpert::w1, &SelectedExpert::v};
  auto proj = ct_matmul(x, m, n, plan_in, first, 2);
  ArithShare both = ev.rescale(concat(proj));
  ArithShare gate_in = slice(both, 0, tokens * n);
  ArithShare value = slice(both, tokens * n, tokens * n);
  ArithShare act = gelu(ev, gate_in);
  ArithShare glu = ev.mul_fx(act, value);
  std::vector<he::Ciphertext> SelectedExpert::*second[1] = {&SelectedExpert::w2};
  ArithShare y = ev.rescale(ct_matmul(glu, n, m, plan_out, second, 1)[0]);

  if (opts.gate_scaling) {
    ArithShare w = gate_weight(ev, routing.indicator, tokens, E);
    y = ev.mul_fx(y, broadcast_rows(w, m));
  }
  if (phases) {
    phases->selection = after_selection - start;
    phases->compute = p.ep().stats() - after_selection;
  }
  return y;
}

ArithShare dense_moe(Evaluator& ev, Linear& lin, const ArithShare& x,
                     size_t tokens, const ArithShare& scores,
                     std::span<const ExpertWeights> experts,
                     const MoeOptions& opts) {
  check_experts(experts);
  const size_t E = experts.size();
  const size_t m = experts[0].w1.rows();
  Routing routing = route_top1(ev, scores, tokens, E);
  ArithShare y(std::vector<uint64_t>(tokens * m, 0), ev.scale());
  for (size_t e = 0; e < E; ++e) {
    ArithShare out = expert_ffn(ev, lin, x, tokens, experts[e], e > 0);
    ArithShare te(std::vector<uint64_t>(tokens), 0);
    for (size_t t = 0; t < tokens; ++t) te.v[t] = routing.indicator.v[t * E + e];
    if (opts.gate_scaling) {
      ArithShare w = ev.mul_public(te, ev.enc(1.0), ev.scale());
      y = ev.add(y, ev.mul_fx(out, broadcast_rows(w, m)));
    } else {
      ArithShare weighted = ev.mul(out, broadcast_rows(te, m));
      y = ev.add(y, weighted);
    }
  }
  return y;
}

ArithShare plain_sparse_moe(PlainEvaluator& ev, const ArithShare& x,
                            size_t tokens, const ArithShare& scores,
                            std::span<const ExpertWeights> experts,
                            const MoeOptions& opts) {
  check_experts(experts);
  const size_t E = experts.size();
  const size_t m = experts[0].w1.rows();
  Routing routing = route_top1(ev, scores, tokens, E);
  PlainLinear lin(ev.cfg());
  ArithShare y(std::vector<uint64_t>(tokens * m, 0), ev.scale());
  for (size_t t = 0; t < tokens; ++t) {
    size_t chosen = 0;
    for (size_t e = 0; e < E; ++e)
      if (routing.onehot.get(t * E + e)) chosen = e;
    ArithShare row = expert_ffn(ev, lin, slice(x, t * m, m), 1, experts[chosen]);
    std::copy(row.v.begin(), row.v.end(), y.v.begin() + t * m);
  }
  if (opts.gate_scaling) {
    ArithShare w = gate_weight(ev, routing.indicator, tokens, E);
    y = ev.mul_fx(y, broadcast_rows(w, m));
  }
  return y;
}

}  // namespace secmoe
