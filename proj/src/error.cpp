#include "qgc/error.hpp"

namespace qgc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config error";
    case ErrorKind::Template: return "template error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Provider: return "provider error";
    case ErrorKind::Timeout: return "timeout error";
  }
  return "error";
}

}  // namespace qgc
