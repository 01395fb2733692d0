#pragma once

#include "sfcsim/agents.hpp"
#include "sfcsim/qnetwork.hpp"

namespace sfcsim {

inline constexpr int kSfcFeatures = 4 + kVnfKinds;
inline constexpr int kInputA = kSfcKinds * kSfcFeatures;
inline constexpr int kInputB = 3 * kVnfKinds + 3;
inline constexpr int kInputC = kInputA + 2;

// Fixed-length, [0, 1]-normalized view of one DC and its cluster at time t.
// input_a: per SFC type over requests located at `dc`: count / bundle max,
//   min remaining deadline / max tolerance, bandwidth / 100 Mbps, mean chain
//   completion, and the share of each VNF type as the next function.
// input_b: per VNF type installed / cap, idle / cap (cap = how many fit in
//   the DC by vCPU) and a 0/1 flag for "an idle instance exists or one fits,
//   and a ready request in the cluster wants this type next"; then free vCPU,
//   RAM and storage fractions.
// input_c: input_a's features over the whole cluster queue, then the share of
//   requests whose next VNF the cluster cannot host and the share with an
//   out-of-cluster destination.
StateEncoding encode_state(const World& world, int cluster, int dc, double t);

}  // namespace sfcsim
