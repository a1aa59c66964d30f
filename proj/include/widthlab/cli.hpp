#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace widthlab::cli {

/// Runs one command. args excludes the program name. Output files named "-"
/// go to out. Returns 0 on success, 1 on validation or usage errors, 2 on
/// numerical failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace widthlab::cli
