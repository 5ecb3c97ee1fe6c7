#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace valori::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kMismatch = 1,
  kFormatError = 2,
  kUsageError = 3,
};

struct Terminal {
  bool color = false;
};

// Runs one `valori` invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        Terminal term = {});

// Colour is used only on a terminal and never when VALORI_NO_COLOR is set.
Terminal detect_terminal();

}  // namespace valori::cli
