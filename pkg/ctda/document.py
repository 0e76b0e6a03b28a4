"""
JSON documents exchanged by the command line and the library.

A `Document` is a `dict` whose admissible keys are declared as class
level `Field` objects, each one holding a `schema` definition::

    >>> class DistributionDocument(Document):
    ...     probs = Field([float], mandatory=True)

Fields are collected by the `Validable` metaclass (inherited fields
included) and removed from the class namespace.

"""
import abc
import collections.abc
import json

from schema import Schema, SchemaError

from ctda.utils import unfreeze


class BaseField(metaclass=abc.ABCMeta):
    @abc.abstractmethod
    def validate(self, data):
        """Raise an exception on invalid data."""
        pass


class Field(BaseField):

    NODEFAULT = object()

    def __init__(self, schema_definition, mandatory=False, default=NODEFAULT):
        self.validator = Schema(schema_definition)
        self.mandatory = mandatory
        self.default = default

    def validate(self, data):
        return self.validator.validate(unfreeze(data))


class Validable(type):
    def __new__(mcl, name, bases, nmspc):

        # Register fields
        newnamespace = {"__fields__": dict()}
        for base in bases:
            if isinstance(base, Validable):
                for key, value in base.__fields__.items():
                    newnamespace["__fields__"][key] = value

        for key, value in nmspc.items():
            if isinstance(value, BaseField):
                newnamespace["__fields__"][key] = value
            else:
                newnamespace[key] = value

        return super(Validable, mcl).__new__(mcl, name, bases, newnamespace)


class Document(dict, metaclass=Validable):
    """Base Document class."""

    #: Keys tolerated without a field declaration (the run envelope).
    __envelope__ = frozenset(['config', 'version', 'seed'])

    def __missing__(self, key):
        if key not in self.__fields__:
            raise KeyError(key)
        else:
            default = self.__fields__[key].default
            if default is Field.NODEFAULT:
                raise KeyError(key)
            elif isinstance(default, collections.abc.Callable):
                return default()
            else:
                return default

    def validate(self):
        for key in self:
            if key not in self.__fields__ and key not in self.__envelope__:
                raise SchemaError(
                    "Unexpected key %r in %s" % (key, type(self).__name__))

        for name, field in self.__fields__.items():
            if name in self:
                try:
                    field.validate(self[name])
                except SchemaError as exc:
                    raise SchemaError(
                        "Invalid value on field %r for %s: %s"
                        % (name, type(self).__name__, exc)) from exc
            elif field.mandatory:
                raise SchemaError(
                    "Mandatory field %r is not defined for %s"
                    % (name, type(self).__name__))
            else:
                pass

    def as_dict(self):
        """Return a JSON serializable dictionary with this document data."""
        return {k: unfreeze(v) for k, v in self.items()}

    def dumps(self):
        """Validate and serialize deterministically."""
        self.validate()
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def dump(self, path):
        with open(path, 'w', encoding='utf-8') as stream:
            stream.write(self.dumps())

    @classmethod
    def loads(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError("Not a JSON document: %s" % exc) from exc
        if not isinstance(data, dict):
            raise SchemaError("%s must be a JSON object" % cls.__name__)
        obj = cls(data)
        obj.validate()
        return obj

    @classmethod
    def load(cls, path):
        with open(path, encoding='utf-8') as stream:
            return cls.loads(stream.read())

    def __repr__(self):  # pragma: no cover
        return "{}({})".format(
            self.__class__.__name__,
            ", ".join("{}={!r}".format(k, v) for k, v in self.items()))
