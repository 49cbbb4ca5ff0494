#ifndef VOXCOVER_FITS_HPP
#define VOXCOVER_FITS_HPP

#include <string>

#include "voxcover/volume.hpp"

namespace voxcover {

// Minimal FITS reader/writer for dense 3D grids.
//
// Supported subset, bit-exact: 2880-byte header blocks of 80-char cards;
// required cards SIMPLE=T, BITPIX in {16, -32}, NAXIS=3, NAXIS1..3; optional
// BSCALE/BZERO honored on read and never written; data big-endian, zero-padded
// to a 2880-byte boundary; first axis fastest (matches Volume's x-fastest
// layout). Unrecognized cards are ignored on read. No extensions, no
// compression, no 4D files.

// Reads a 3D volume. Values are scaled by BSCALE/BZERO when present and must
// all be finite. Throws IoError (missing/unreadable file), FormatError
// (malformed card, truncated data, non-finite values), UnsupportedError
// (SIMPLE=F or BITPIX outside the subset), DimensionError (NAXIS != 3).
Volume load_fits(const std::string& path);

// Writes intensities as BITPIX=-32 (IEEE float32). Round-trips exactly.
void save_fits(const Volume& v, const std::string& path);

// Writes labels as BITPIX=16. Labels must fit in int16.
void save_fits(const LabelVolume& lv, const std::string& path);

// Reads a label volume written by save_fits: BITPIX=16, all values
// nonnegative integers. k is max label + 1; summary holds per-cluster counts
// with empty mean vectors (callers attach means from companion data).
LabelVolume load_label_fits(const std::string& path);

} // namespace voxcover

#endif
