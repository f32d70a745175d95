#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "annuli/flow.hpp"
#include "annuli/loop_algebra.hpp"

namespace annuli::cli {

enum Exit { ok = 0, check_failed = 1, bad_config = 2, io_error = 3 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string subcommand;
    std::string input, output;
    GridSpec grid{0, 1, 1e-2, 0, 1, 1e-2};
    std::vector<cplx> lambdas;
    Tolerances tol;
    unsigned long long seed = 0;
    std::string format;
};

// "x0:x1:hx,y0:y1:hy"; throws ConfigError
GridSpec parse_grid(const std::string& s);
// "1", "-0.5", "2i", "-i", "0.3+0.4i", "1e-3-2e-2i"; throws ConfigError
cplx parse_complex(const std::string& s);

// {"g": int, "delta": [re, im], "coeffs": [[[re, im] x 4] for d = -1..g]}, row-major
nlohmann::ordered_json potential_to_json(const MatrixLaurent& x);
// structural parse only; throws ConfigError naming the field at fault
MatrixLaurent potential_from_json(const nlohmann::json& j);
nlohmann::ordered_json complex_list(const std::vector<cplx>& v);

// full command line, argv[0] included
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace annuli::cli
