#include <iostream>

#include "fleetcharge/app.hpp"

int main(int argc, char** argv) {
    return fleetcharge::run_cli(argc, argv, std::cout, std::cerr);
}
