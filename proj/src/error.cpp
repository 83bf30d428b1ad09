#include "stencilstream/error.hpp"

namespace stencilstream {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::extent: return "extent";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::codec: return "codec";
    case ErrorKind::stability: return "stability";
    case ErrorKind::schedule: return "schedule";
    case ErrorKind::incompatible: return "incompatible";
    case ErrorKind::io: return "io";
    }
    return "internal";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::usage: return 2;
    case ErrorKind::config: return 3;
    case ErrorKind::extent: return 3;
    case ErrorKind::capacity: return 4;
    case ErrorKind::codec: return 5;
    case ErrorKind::stability: return 6;
    case ErrorKind::schedule: return 7;
    case ErrorKind::incompatible: return 8;
    case ErrorKind::io: return 9;
    }
    return 1;
}

} // namespace stencilstream
