#pragma once

#include <iosfwd>
#include <string>

#include "gatecell/model.hpp"

namespace gatecell {

// Flat binary checkpoint, little-endian throughout:
//
//   "GCEL1"                         5 bytes
//   variant                         u32 (0 vanilla, 1 lstm1, 2 lstm2, 3 lstm3)
//   m, n                            u32 each
//   present cell blocks             f64 row-major, fixed order
//                                   W_i,U_i,b_i, W_f,U_f,b_f, W_o,U_o,b_o,
//                                   W_c,U_c,b_c (absent blocks skipped)
//
// A parameter-only file ends there. A model file appends, in this order:
//
//   vocab                           u32 (0 = no embedding layer)
//   [dim u32, table f64 V*d]        when vocab > 0
//   classes                         u32
//   head W f64 K*n, head b f64 K
//
void write_lstm_checkpoint(std::ostream& out, const LstmParams& params);
LstmParams read_lstm_checkpoint(std::istream& in);

void write_lstm_checkpoint(const std::string& path, const LstmParams& params);
LstmParams read_lstm_checkpoint_file(const std::string& path); // rejects trailing bytes

void write_model_checkpoint(const std::string& path, const Model& model);
Model read_model_checkpoint(const std::string& path);

} // namespace gatecell
