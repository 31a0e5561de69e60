from .numerics import *
from .paths import *
from .settings import *
