#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mtsplan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitStage = 3;
inline constexpr int kExitUncleared = 4;

/// Entry point behind the `mtsplan` binary. `args` excludes the program name.
/// Every flag can also be supplied as MTSPLAN_<FLAG> in the environment; flags win.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtsplan
