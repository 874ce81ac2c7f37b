#pragma once

#include "projem/config.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace projem {

/// Command-line overrides applied on top of the config file.
struct CommandOptions {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int model = 3;
inline constexpr int budget = 4;
inline constexpr int diverged = 5;
}  // namespace exit_code

int cmd_convergence(const std::string& config_path, const CommandOptions& options,
                    std::ostream& out, std::ostream& err);
int cmd_mlmc(const std::string& config_path, const CommandOptions& options, std::ostream& out,
             std::ostream& err);
int cmd_price(const std::string& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err);

}  // namespace projem
