#include "semiflow/run.hpp"

int main(int argc, char** argv) { return semiflow::run_cli(argc, argv); }
