from .formatters import *
from .hash import *
from .log import *
