#include "cohortflow/app/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return cohortflow::app::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
