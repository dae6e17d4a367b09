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

#include "secmoe/party.h"

namespace secmoe {

#define SECMOE_COUNTER_FIELDS(X)                                         \
  X(mul) X(trunc) X(msb) X(and_bits) X(b2a) X(mux_public) X(mux)          \
  X(compare) X(matmul_ss) X(he_encrypt) X(he_decrypt) X(he_mul_ct)        \
  X(he_mul_plain)

OpCounters& OpCounters::operator+=(const OpCounters& o) {
#define X(f) f += o.f;
  SECMOE_COUNTER_FIELDS(X)
#undef X
  return *this;
}

OpCounters operator-(const OpCounters& a, const OpCounters& b) {
  OpCounters d;
#define X(f) d.f = a.f - b.f;
  SECMOE_COUNTER_FIELDS(X)
#undef X
  return d;
}

namespace {

he::HeParams with_plain_bits(he::HeParams params, int ell) {
  params.plain_bits = ell;
  return params;
}

}  // namespace

Party::Party(Role role, Endpoint& endpoint, CorrelationPool pool,
             FixedConfig cfg, uint64_t seed, he::HeParams he_params)
    : role_(role),
      ep_(&endpoint),
      pool_(std::move(pool)),
      cfg_(cfg),
      prg_(seed, 0x5041 + static_cast<uint64_t>(role)),
      he_(with_plain_bits(he_params, cfg.ell)) {
  cfg_.validate();
  SECMOE_ENFORCE(endpoint.role() == role, ErrorCode::kInvalidConfig,
                 "{} party bound to a {} endpoint", role_name(role),
                 role_name(endpoint.role()));
  SECMOE_ENFORCE(pool_.ell() == cfg.ell, ErrorCode::kInvalidConfig,
                 "pool ring width {} differs from config {}", pool_.ell(),
                 cfg.ell);
  if (!pool_.is_counting()) {
    SECMOE_ENFORCE(pool_.role() == role, ErrorCode::kInvalidConfig,
                   "{} party given the {} pool", role_name(role),
                   role_name(pool_.role()));
  }
}

he::SecretKey& Party::secret_key() {
  SECMOE_ENFORCE(is_client(), ErrorCode::kProtocol,
                 "only the client holds the secret key");
  if (!sk_) sk_ = he::SecretKey::generate(he_.params(), prg_.next_u64());
  return *sk_;
}

}  // namespace secmoe
