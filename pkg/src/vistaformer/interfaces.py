from zope.interface import (
    Interface,
    Attribute,
)


# ---------------------------------------------------------------------------
# Interfaces for layers
# ---------------------------------------------------------------------------
class IModule(Interface):
    name = Attribute('attribute name under which the module is registered with its parent')
    training = Attribute('whether stochastic layers are active')

    def forward(*args):
        """Compute the output tensor."""

    def forward_shape(shape):
        """Report the FLOPs of `forward` for an input of `shape`, return the output shape."""

    def named_parameters(prefix=''):
        """Iterate (dotted name, parameter tensor) pairs in registration order."""


class IAttention(IModule):
    num_heads = Attribute('number of heads')

    def forward(x):
        """Attend within each (S, H, W, C) token grid slice; return the same shape."""


class IReducer(IModule):

    """Collapses the time axis of a decoder branch to length 1."""
