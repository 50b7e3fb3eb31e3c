#pragma once

#include "ttcert/tt_core.hpp"

#include <iosfwd>
#include <string>

namespace ttcert {

// Binary layout: 8-byte magic ("TTVEC001" or "TTMAT001"), uint32 endianness
// tag 0x01020304, uint64 d, then per core its shape (uint64 each), then all
// core entries as little-endian float64 in storage order.

void write_tt(std::ostream& out, const TtVector& x);
TtVector read_tt(std::istream& in);
void write_ttm(std::ostream& out, const TtMatrix& a);
TtMatrix read_ttm(std::istream& in);

void save_tt(const std::string& path, const TtVector& x);
TtVector load_tt(const std::string& path);
void save_ttm(const std::string& path, const TtMatrix& a);
TtMatrix load_ttm(const std::string& path);

}  // namespace ttcert
