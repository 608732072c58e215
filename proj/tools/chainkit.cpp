#include "chainkit/cli.hpp"

int main(int argc, char** argv) { return chainkit::run(argc, argv); }
