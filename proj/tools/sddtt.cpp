#include "sdd/app.hpp"

int main(int argc, char** argv) { return sdd::run(argc, argv); }
