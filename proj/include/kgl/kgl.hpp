#pragma once

#include "kgl/bundle.hpp"
#include "kgl/commands.hpp"
#include "kgl/error.hpp"
#include "kgl/hilbert_lin.hpp"
#include "kgl/io.hpp"
#include "kgl/kernel.hpp"
#include "kgl/kernel_gen.hpp"
#include "kgl/krein_core.hpp"
#include "kgl/krein_lin.hpp"
#include "kgl/numlin.hpp"
#include "kgl/random.hpp"
#include "kgl/report.hpp"
#include "kgl/sgpd.hpp"
#include "kgl/sgpd_generate.hpp"
