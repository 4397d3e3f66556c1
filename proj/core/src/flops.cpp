#include "vot/decoder.hpp"

namespace vot::decoder {

namespace {

// One attention sub-layer over `groups` independent sets of `n` tokens.
FlopTerms attention_cost(double groups, double n, double d) {
  FlopTerms f;
  f.projections = 4.0 * 2.0 * groups * n * d * d;  // Q, K, V and output
  f.scores = 2.0 * groups * n * n * d;             // summed over heads
  f.values = 2.0 * groups * n * n * d;
  return f;
}

void accumulate(FlopTerms& into, const FlopTerms& f, double times) {
  into.projections += times * f.projections;
  into.scores += times * f.scores;
  into.values += times * f.values;
}

}  // namespace

FlopCount count_flops(const DecoderConfig& config, std::size_t frames,
                      std::size_t patches) {
  const double t = static_cast<double>(frames);
  const double s = static_cast<double>(patches);
  const double d = static_cast<double>(config.hidden_dim);
  const double layers = static_cast<double>(config.layers);

  FlopCount out;
  // Temporal: one group per patch position, T tokens; camera rows skipped.
  const FlopTerms temporal = attention_cost(s, t, d);
  // Spatial: one group per frame, h*w + 1 tokens.
  const FlopTerms spatial = attention_cost(t, s + 1.0, d);
  accumulate(out.time_space, temporal, layers);
  accumulate(out.time_space, spatial, layers);
  out.temporal_scores = layers * temporal.scores;

  // Full: the same two sub-layers, each attending over every frame at once.
  accumulate(out.full, attention_cost(1.0, t * s, d), layers);
  accumulate(out.full, attention_cost(1.0, t * (s + 1.0), d), layers);
  return out;
}

}  // namespace vot::decoder
