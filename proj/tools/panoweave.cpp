// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "panoweave/cli.hpp"

int main(int argc, char** argv) { return panoweave::cli::run(argc, argv, std::cout, std::cerr); }
