#include "spectrwm/experiments.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return spectrwm::run_cli(argc, argv, std::cout, std::cerr);
}
