// SPDX-License-Identifier: Apache-2.0
#include "motortherm/commands.hpp"

int main(int argc, char** argv) { return motortherm::run_cli(argc, argv); }
