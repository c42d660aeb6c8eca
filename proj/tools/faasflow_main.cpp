// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "faasflow/cli.hpp"

int main(int argc, char** argv) { return faasflow::cli::main(argc, argv, std::cout, std::cerr); }
