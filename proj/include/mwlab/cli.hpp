#pragma once

namespace mwlab {

// Entry point for the mwlab tool. Returns 0 on success, 1 when a checked
// bound or numeric guard fails, 2 on usage, IO or validation errors.
int run_cli(int argc, char** argv);

}  // namespace mwlab
