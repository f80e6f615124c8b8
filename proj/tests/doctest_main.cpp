#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "histofeat/logging.hpp"

int main(int argc, char** argv) {
    histofeat::set_log_enabled(false);  // keep test output readable
    doctest::Context ctx;
    ctx.applyCommandLine(argc, argv);
    return ctx.run();
}
