#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fewshot/embeddings.h"
#include "fewshot/emission.h"
#include "run_config.h"

namespace fewshot::cli {

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

int cmd_synth(const RunConfig& config, std::ostream& out);
int cmd_sample_episodes(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);

// Parses argv, dispatches and maps exceptions to exit codes. Everything the
// commands print goes to `out`; diagnostics and timings go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Shared settings resolution.
ScorerConfig scorer_from(const RunConfig& config);
std::unique_ptr<EmbeddingSource> source_from(const RunConfig& config);
std::vector<std::uint64_t> seeds_from(const RunConfig& config);
int threads_from(const RunConfig& config);

// Replaces every "{seed}" in a path pattern.
std::string expand_seed(const std::string& pattern, std::uint64_t seed);

}  // namespace fewshot::cli
