#pragma once

#include "kdrift/classifier.hpp"
#include "kdrift/cmgmm.hpp"
#include "kdrift/em.hpp"
#include "kdrift/errors.hpp"
#include "kdrift/io.hpp"
#include "kdrift/kd3.hpp"
#include "kdrift/kde.hpp"
#include "kdrift/matrix.hpp"
#include "kdrift/mixture.hpp"
#include "kdrift/prequential.hpp"
#include "kdrift/rng.hpp"
#include "kdrift/streamgen.hpp"
