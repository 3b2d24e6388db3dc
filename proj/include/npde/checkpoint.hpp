#pragma once

// Text checkpoint format:
//
//   npde-checkpoint 1 input_dim=2 width=4 blocks=3 activation=swish adaptive=0 trial=raw epoch=1000
//   params 137
//   <one value per line, %.17g, in ParamSet flat order>
//   adam 1000 137
//   <m values>
//   <v values>
//
// The adam section is optional.

#include <cstdint>
#include <optional>
#include <string>

#include "npde/netcore.hpp"
#include "npde/optim.hpp"
#include "npde/trialspace.hpp"

namespace npde {

struct Checkpoint {
  ResNetParams params;
  TrialFunction trial;
  std::int64_t epoch = 0;
  std::optional<AdamState> adam;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace npde
