#pragma once

#include <iosfwd>
#include <string>

#include "cfris/channel.hpp"

namespace cfris {

// Binary fixture format for a ChannelSet (see docs/formats.md): little-endian
// header ("CFCH", version, S, K, C*N_r, Q*M, N_t) followed by row-major
// complex64 (float32 re/im pairs) blocks, G then H then R, slot-major.
void dump_channels(const ChannelSet& set, std::ostream& out);
void dump_channels(const ChannelSet& set, const std::string& path);
ChannelSet load_channels(std::istream& in);
ChannelSet load_channels(const std::string& path);

}  // namespace cfris
