#ifndef SITREP_TOOLS_OUTPUT_H_
#define SITREP_TOOLS_OUTPUT_H_

#include <ostream>

#include "commands.h"

namespace sitrep::cli {

void PrintJson(const CommandOutput& output, std::ostream& out);
void PrintHuman(const CommandOutput& output, std::ostream& out);

}  // namespace sitrep::cli

#endif  // SITREP_TOOLS_OUTPUT_H_
