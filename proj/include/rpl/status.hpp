#pragma once
#include <map>
#include <string>

namespace rpl {

enum class Status { Pass, Fail, Indeterminate, Skipped };
const char* status_name(Status s);

struct HypothesisStatus {
  Status status = Status::Indeterminate;
  std::map<std::string, double> evidence;
  std::string note;
};

struct Tolerances {
  double tol_gs = 1e-10;
  double tol_eig = 1e-8;
  double tol_prof = 1e-8;
  double tol_mod = 1e-10;
  double tau_cls = 1e-9;   // relative to omega
  double tau_res = 1e-3;   // relative to omega
  double tau_fgr = 1e-2;
  double tau_edge = 1e-3;  // relative to omega
  double tau_vk = 1e-8;
  double tau_cont = 1e-2;
  double tau_kernel = 1e-7;
};

}  // namespace rpl
