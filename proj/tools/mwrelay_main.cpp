// SPDX-License-Identifier: MIT
//
// mwrelay — command-line entry point.

#include "mwrelay/run_config.hpp"

int main(int argc, char** argv) { return mwrelay::run_cli(argc, argv); }
