// SPDX-License-Identifier: Apache-2.0
#include "coalpp/cli.hpp"

int main(int argc, char** argv) { return coalpp::cli::run_cli(argc, argv); }
