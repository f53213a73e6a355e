#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qgc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitProvider = 3;

inline constexpr const char* kDefaultInstruction =
    "Answer the question based on the given context.";

/// Entry point for the `qgc` tool. `args[0]` is the program name.
/// Subcommands: compress, eval, sweep, generate, prompts, record.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qgc::cli
