#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cagnet/config.hpp"

namespace cagnet::cli {

// Command implementations shared by the binary and the tests. Each returns a
// process exit code and reports failures on `err`.

int gen_world(const RunConfig& config, std::ostream& out, std::ostream& err);

int attrs_build(const RunConfig& config, std::ostream& out, std::ostream& err);

int train_cmd(const RunConfig& config, const std::string& variant, std::ostream& out,
              std::ostream& err);

// Scores either config.predictions_path or, when empty, decodes
// config.checkpoint_path over the dataset regions first.
int eval_cmd(const RunConfig& config, std::ostream& out, std::ostream& err);

// Prints the top-k neighbors (IoU + similarity weights) of one region, plus
// the generated caption per named checkpoint ("name=path").
int demo_context(const RunConfig& config, const std::string& image_id,
                 std::size_t region, const std::vector<std::string>& checkpoints,
                 std::ostream& out, std::ostream& err);

// sweep in {variants, attrs, frontend, k, fusion}; seeds averaged per cell.
int ablate(const RunConfig& config, const std::string& sweep,
           const std::vector<std::uint64_t>& seeds, std::ostream& out,
           std::ostream& err);

}  // namespace cagnet::cli
