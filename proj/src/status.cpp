#include "rpl/status.hpp"

namespace rpl {

const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Indeterminate: return "indeterminate";
    case Status::Skipped: return "skipped";
  }
  return "indeterminate";
}

}  // namespace rpl
