#pragma once

#include "xmems/channel.hpp"
#include "xmems/experiments.hpp"
#include "xmems/io.hpp"
#include "xmems/mems.hpp"
#include "xmems/qmat.hpp"
#include "xmems/sdp.hpp"
#include "xmems/xstate.hpp"
