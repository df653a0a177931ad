// SPDX-License-Identifier: Apache-2.0
#include "hinrank/cli.hpp"

int main(int argc, char** argv) { return hinrank::cli::run(argc, argv); }
