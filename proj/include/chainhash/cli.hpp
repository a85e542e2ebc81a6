#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chainhash {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitValidation = 2,
    kExitTransport = 3,
    kExitNotOwned = 4,
};

// args excludes the program name. Reports go to out, logs to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chainhash
