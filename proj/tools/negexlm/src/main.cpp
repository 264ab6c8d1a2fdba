#include "negexlm_cli/commands.hpp"

int main(int argc, char** argv) { return negexlm::cli::run_cli(argc, argv); }
