// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "dloamp/ce_net.hpp"
#include "dloamp/oamp_net.hpp"

namespace dloamp {

/// Structured-text checkpoints.  Doubles are written with 17 significant
/// digits so a save/load round trip is bit exact.  Loaders validate the
/// format tag and dimensions and report the byte offset on parse errors.

void save_ce_checkpoint(const CeNetParams& params, const std::string& path);
CeNetParams load_ce_checkpoint(const std::string& path, int expected_n = 0);

void save_oamp_net_checkpoint(const OampNetParams& params, const std::string& path);
OampNetParams load_oamp_net_checkpoint(const std::string& path, int expected_layers = 0);

/// Loss-history CSV: header epoch,train_loss,dev_loss,dev_ber.
void save_train_history(const std::vector<TrainEpochRecord>& history, const std::string& path);

}  // namespace dloamp
