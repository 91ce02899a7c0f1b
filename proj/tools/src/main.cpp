#include "commands.hpp"

int main(int argc, char** argv) {
    return rarelearn::cli::run_cli(argc, argv);
}
